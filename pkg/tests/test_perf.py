import itertools
import math
from dataclasses import replace

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import ORDERS, fetch_counts, halvings, map_layer_oracle, simulate_tile_loops
from verdant.approxmul import build_exact_multiplier
from verdant.approxmul.search import exact_variant
from verdant.errors import ConfigError, InfeasibleMappingError
from verdant.perf import (
    AcceleratorConfig,
    AcceleratorPreset,
    AreaLib,
    LayerShape,
    accelerator_area,
    array_shape,
    builtin_workload,
    layer_macs,
    load_workload,
    map_layer,
    workload_latency,
)
from verdant.perf.model import tile_candidates


INF = float("inf")


def as_dict(L):
    return dict(K=L.K, C=L.C, H=L.H, W=L.W, R=L.R, S=L.S, stride=L.stride,
                bytes_per_element=L.bytes_per_element)


def test_layer_macs():
    conv1 = builtin_workload("vgg16")[0]
    assert layer_macs(conv1) == 86_704_128
    assert layer_macs(LayerShape.fc(4096, 1000)) == 4_096_000
    assert layer_macs(LayerShape("conv", 1, 1)) == 1


def test_tile_candidates_match_halving_ladder():
    for bound in (1, 2, 3, 7, 56, 64, 100, 224, 4096):
        assert tile_candidates(bound) == halvings(bound)


def test_loop_nest_counts_match_closed_form():
    for order in ORDERS:
        for n in itertools.product([1, 2, 3], [1, 2, 4], [1, 3, 5]):
            assert simulate_tile_loops(order, *n) == fetch_counts(order, *n)


def test_on_array_layer_infinite_bandwidth():
    L = LayerShape("conv", C=16, K=24, H=7, W=5, R=3, S=3)
    cfg = AcceleratorConfig(32, 32, 1 << 10, 1 << 20, dram_bw_bytes_per_cycle=INF)
    _, cycles = map_layer(L, cfg)
    assert cycles == 7 * 5 * 3 * 3


def test_vgg16_conv3_1_on_1024_pes():
    L = next(layer for layer in builtin_workload("vgg16") if layer.name == "conv3_1")
    cfg = AcceleratorPreset().config(1024, 1e9)
    assert (cfg.pe_width, cfg.pe_height) == (32, 32)
    mapping, cycles = map_layer(L, cfg)
    want = map_layer_oracle(as_dict(L), 32, 32, cfg.regfile_bytes_per_pe, cfg.global_buffer_bytes,
                            cfg.dram_bw_bytes_per_cycle)
    assert (cycles, mapping.tiles, mapping.order) == want
    assert cycles == 903_317  # pinned from the oracle


layers = st.builds(
    lambda C, K, H, W, R, stride: LayerShape("conv", C, K, H, W, R, R, stride),
    st.integers(1, 48), st.integers(1, 48), st.integers(1, 14), st.integers(1, 14),
    st.sampled_from([1, 3]), st.sampled_from([1, 2]),
)


configs = st.builds(
    lambda pw, ph, rf, gbuf, bw: AcceleratorConfig(pw, ph, rf, gbuf, dram_bw_bytes_per_cycle=bw),
    st.sampled_from([1, 2, 4, 8, 16]), st.sampled_from([1, 2, 4, 8, 16]),
    st.sampled_from([9, 32, 128]), st.sampled_from([2048, 8192, 65536]),
    st.sampled_from([1.0, 8.0, 64.0, INF]),
)


@settings(max_examples=150, deadline=None)
@given(layers, configs)
def test_map_layer_matches_brute_force(L, cfg):
    want = map_layer_oracle(as_dict(L), cfg.pe_width, cfg.pe_height, cfg.regfile_bytes_per_pe,
                            cfg.global_buffer_bytes, cfg.dram_bw_bytes_per_cycle)
    if want is None:
        with pytest.raises(InfeasibleMappingError):
            map_layer(L, cfg)
        return
    mapping, cycles = map_layer(L, cfg)
    assert (cycles, mapping.tiles, mapping.order) == want


@settings(max_examples=100, deadline=None)
@given(layers, configs)
def test_mapping_respects_capacity_and_lower_bound(L, cfg):
    try:
        m, cycles = map_layer(L, cfg)
    except InfeasibleMappingError:
        return
    assert 2 * m.working_set_bytes <= cfg.global_buffer_bytes
    assert m.regfile_bytes <= cfg.regfile_bytes_per_pe
    assert cycles >= layer_macs(L) / cfg.pes
    assert map_layer(L, cfg) == (m, cycles)


@settings(max_examples=100, deadline=None)
@given(layers, configs)
def test_more_bandwidth_never_slower(L, cfg):
    try:
        _, slow = map_layer(L, cfg)
    except InfeasibleMappingError:
        return
    faster = replace(cfg, dram_bw_bytes_per_cycle=cfg.dram_bw_bytes_per_cycle * 2)
    assert map_layer(L, faster)[1] <= slow


@pytest.mark.parametrize("pes", [64, 128, 256, 512])
def test_quadrupling_array_never_slower(pes):
    work = builtin_workload("vgg16")
    preset = replace(AcceleratorPreset(), dram_bw_bytes_per_cycle=INF)
    small = preset.config(pes, 1e9)
    big = replace(small, pe_width=small.pe_width * 2, pe_height=small.pe_height * 2)
    assert workload_latency(work, big).cycles_per_inference <= workload_latency(work, small).cycles_per_inference


def test_infeasible_when_regfile_too_small():
    L = LayerShape("conv", C=8, K=8, H=4, W=4, R=3, S=3)
    with pytest.raises(InfeasibleMappingError):
        map_layer(L, AcceleratorConfig(8, 8, 8, 1 << 20))


def test_workload_latency_sums_layers():
    cfg = AcceleratorPreset().config(256, 1e9)
    work = builtin_workload("vgg16")
    single = workload_latency(work[:1], cfg)
    assert single.cycles_per_inference == map_layer(work[0], cfg)[1]
    once = workload_latency(work, cfg)
    twice = workload_latency(work + work, cfg)
    assert twice.cycles_per_inference == 2 * once.cycles_per_inference
    assert once.fps == cfg.clock_hz / once.cycles_per_inference
    assert once.latency_s == once.cycles_per_inference / cfg.clock_hz
    assert 0 < once.utilization <= 1


def test_vgg16_on_2048_pes_is_sum_of_oracle_layers():
    cfg = AcceleratorPreset().config(2048, 1e9)
    work = builtin_workload("vgg16")
    total = 0
    for L in work:
        c, _, _ = map_layer_oracle(as_dict(L), cfg.pe_width, cfg.pe_height, cfg.regfile_bytes_per_pe,
                                   cfg.global_buffer_bytes, cfg.dram_bw_bytes_per_cycle)
        total += c
    assert workload_latency(work, cfg).cycles_per_inference == total


def test_array_shape():
    assert array_shape(1024) == (32, 32)
    assert array_shape(2048) == (32, 64)
    assert array_shape(2048, 1) == (64, 32)
    assert array_shape(64, -1) == (4, 16)
    with pytest.raises(ValueError):
        array_shape(96)
    with pytest.raises(ValueError):
        array_shape(4, 3)


AREA = AreaLib(ge_to_mm2=1e-7, sram_mm2_per_byte=5e-7, adder_ge=300.0, fixed_overhead_mm2=0.02)


def test_area_degenerate_config():
    lib = AreaLib(1e-7, 5e-7, 300.0, 0.0)
    cfg = AcceleratorConfig(4, 4, 0, 0)
    zero = type("V", (), {"area": 0.0})()
    assert accelerator_area(cfg, zero, lib) == 16 * 300.0 * 1e-7


def test_area_1024_exact_seven_nm_hand_sum(config):
    preset = config.node(7)
    cfg = config.accelerator.config(1024, 1e9)
    exact = exact_variant(build_exact_multiplier(8))
    per_pe = 584.0 * 1e-7 + 300.0 * 1e-7 + 64 * 5e-7
    want = 1024 * per_pe + 262144 * 5e-7 + 0.02
    assert accelerator_area(cfg, exact, preset.area) == pytest.approx(want, rel=1e-12)


@given(st.integers(0, 2000), st.integers(0, 2000))
def test_area_monotone_in_variant(n1, n2):
    # gate areas come in half gate-equivalents
    cfg = AcceleratorConfig(16, 16, 64, 4096)
    lo, hi = sorted((n1 * 0.5, n2 * 0.5))
    v = lambda a: type("V", (), {"area": a})()  # noqa: E731
    assert accelerator_area(cfg, v(lo), AREA) <= accelerator_area(cfg, v(hi), AREA)
    if lo < hi:
        assert accelerator_area(cfg, v(lo), AREA) < accelerator_area(cfg, v(hi), AREA)


def test_area_missing_constants():
    with pytest.raises(ConfigError):
        AreaLib.from_dict({"ge_to_mm2": 1e-7})
    with pytest.raises(ConfigError):
        accelerator_area(AcceleratorConfig(2, 2, 1, 1), type("V", (), {"area": 1.0})(), None)


def test_builtin_workloads():
    vgg = builtin_workload("vgg16")
    assert sum(L.kind == "conv" for L in vgg) == 13
    assert sum(L.kind == "fc" for L in vgg) == 3
    assert (vgg[0].K, vgg[0].C, vgg[0].R, vgg[0].S) == (64, 3, 3, 3)
    assert len(builtin_workload("vgg19")) == 19
    r50 = builtin_workload("resnet50")
    assert sum(L.kind == "conv" for L in r50) == 53
    assert sum(L.kind == "conv" for L in builtin_workload("resnet152")) == 155
    with pytest.raises(KeyError):
        builtin_workload("alexnet")


def test_resnet50_macs_close_to_reference():
    # about 4.1 GMACs for a 224x224 image
    macs = sum(layer_macs(L) for L in builtin_workload("resnet50"))
    assert 3.8e9 < macs < 4.2e9


def test_load_workload_file(tmp_path):
    path = tmp_path / "tiny.yaml"
    path.write_text("name: tiny\nlayers:\n  - {kind: conv, C: 3, K: 8, H: 4, W: 4, R: 3, S: 3}\n"
                    "  - {kind: fc, C: 128, K: 10}\n")
    name, layers = load_workload(path)
    assert name == "tiny" and len(layers) == 2 and layers[1].kind == "fc"
    bad = tmp_path / "bad.yaml"
    bad.write_text("- {kind: conv, C: 0, K: 1}\n")
    with pytest.raises(ValueError):
        load_workload(bad)


def test_layer_validation():
    with pytest.raises(ValueError):
        LayerShape("pool", 1, 1)
    with pytest.raises(ValueError):
        LayerShape("fc", 4, 4, H=2)
    assert math.isfinite(layer_macs(LayerShape.fc(10, 10)))
