import sys

from verdant.cli import main

sys.exit(main())
