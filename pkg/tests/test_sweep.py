import math

import numpy as np
import pytest

from gsmhp.channel import ChannelRealization, draw_channel
from gsmhp.params import (
    FDP,
    GSM_HP,
    ChannelParams,
    FeasibilityError,
    RadioParams,
    SystemGeometry,
)
from gsmhp.sweep import (
    CSV_COLUMNS,
    CSV_HEADER,
    ExcessiveSingularityError,
    SweepRecord,
    SweepSpec,
    _drop_rate,
    default_sweep,
    evaluate_point,
    geometry_for,
    run_sweep,
    scheme_feasibility,
    write_csv,
)

SMALL_GEOM = SystemGeometry.make(n_m=4, n_k=2, n_rf=2, n_s=2)
CHAN = ChannelParams(n_ray=4)


def small_radio(**kw):
    return RadioParams(**kw)


def identity_channel_factory(drop, geom, params, rng):
    """Stub: H^H = I padded with zeros (needs n_s <= n_t)."""
    h = np.zeros((geom.n_s, geom.n_t), dtype=complex)
    h[:, :geom.n_s] = np.eye(geom.n_s)
    return ChannelRealization(
        h_matrix=h, ray_gains=np.zeros((geom.n_s, 1), complex),
        azimuths=np.zeros((geom.n_s, 1)), elevations=np.zeros((geom.n_s, 1)),
        beta=np.ones(geom.n_s))


def test_evaluate_point_identity_stub():
    # H^H = I, K = N_T = 2, p_max = 2, sigma2 = 1, B = 1:
    # per-user gain 1, R_k = log2(2) = 1, R_total = 2 bps, EE = 2/P_total
    geom = SystemGeometry.make(n_m=2, n_k=1, n_rf=1, n_s=2)
    radio = small_radio(p_max_w=2.0, noise_psd_dbm_hz=30.0, bandwidth_hz=1.0)
    assert radio.noise_variance_w == pytest.approx(1.0)
    record = evaluate_point(geom, radio, CHAN, FDP, 3, seed=0,
                            channel_factory=identity_channel_factory)
    assert record.r_total_bps == pytest.approx(2.0, rel=1e-12)
    assert record.ee_bit_per_joule == record.r_total_bps / record.power.p_total_w
    assert record.singular_redraws == 0
    assert record.n_drops == 3


def test_evaluate_point_deterministic():
    radio = small_radio()
    a = evaluate_point(SMALL_GEOM, radio, CHAN, GSM_HP, 5, seed=11)
    b = evaluate_point(SMALL_GEOM, radio, CHAN, GSM_HP, 5, seed=11)
    assert a == b
    c = evaluate_point(SMALL_GEOM, radio, CHAN, GSM_HP, 5, seed=12)
    assert c.r_total_bps != a.r_total_bps


def test_drop_rates_are_keyed_by_drop_index_only():
    # extending a run keeps the existing drops' rates bit-identical
    radio = small_radio()
    state = ("idealized-zf", "active-set", "fast", None, None)
    first = [_drop_rate(SMALL_GEOM, radio, CHAN, FDP, state, 3, d, draw_channel)
             for d in range(4)]
    again = [_drop_rate(SMALL_GEOM, radio, CHAN, FDP, state, 3, d, draw_channel)
             for d in range(8)]
    assert first == again[:4]


@pytest.mark.parametrize("gain_model", ["active-set", "grouped"])
@pytest.mark.parametrize("scheme", [GSM_HP, FDP])
def test_fast_engine_matches_reference(gain_model, scheme):
    radio = small_radio()
    fast = evaluate_point(SMALL_GEOM, radio, CHAN, scheme, 4, seed=3,
                          gain_model=gain_model, engine="fast")
    ref = evaluate_point(SMALL_GEOM, radio, CHAN, scheme, 4, seed=3,
                         gain_model=gain_model, engine="reference")
    assert fast.r_total_bps == pytest.approx(ref.r_total_bps, rel=1e-9)
    assert fast.power.p_total_w == pytest.approx(ref.power.p_total_w, rel=1e-9)
    assert fast.power.p_transmission_w == ref.power.p_transmission_w


def test_fast_engine_matches_reference_equal_gain():
    radio = small_radio()
    fast = evaluate_point(SMALL_GEOM, radio, CHAN, GSM_HP, 4, seed=5,
                          mode="equal-gain", gain_model="grouped", engine="fast")
    ref = evaluate_point(SMALL_GEOM, radio, CHAN, GSM_HP, 4, seed=5,
                         mode="equal-gain", gain_model="grouped", engine="reference")
    assert fast.r_total_bps == pytest.approx(ref.r_total_bps, rel=1e-9)


def test_equal_gain_changes_grouped_rates_but_not_active():
    radio = small_radio()
    base = evaluate_point(SMALL_GEOM, radio, CHAN, GSM_HP, 4, seed=7,
                          gain_model="grouped")
    eq = evaluate_point(SMALL_GEOM, radio, CHAN, GSM_HP, 4, seed=7,
                        mode="equal-gain", gain_model="grouped")
    assert eq.r_total_bps != base.r_total_bps
    # the active-set gains only see |column| magnitudes, which phases preserve
    base_a = evaluate_point(SMALL_GEOM, radio, CHAN, GSM_HP, 4, seed=7)
    eq_a = evaluate_point(SMALL_GEOM, radio, CHAN, GSM_HP, 4, seed=7,
                          mode="equal-gain")
    assert eq_a.r_total_bps == pytest.approx(base_a.r_total_bps, rel=1e-12)


def test_threads_do_not_change_results():
    radio = small_radio()
    one = evaluate_point(SMALL_GEOM, radio, CHAN, GSM_HP, 8, seed=13, threads=1)
    many = evaluate_point(SMALL_GEOM, radio, CHAN, GSM_HP, 8, seed=13, threads=8)
    assert one == many


def test_threads_env_var(monkeypatch):
    radio = small_radio()
    monkeypatch.setenv("GSMHP_THREADS", "3")
    a = evaluate_point(SMALL_GEOM, radio, CHAN, GSM_HP, 6, seed=13)
    monkeypatch.setenv("GSMHP_THREADS", "1")
    b = evaluate_point(SMALL_GEOM, radio, CHAN, GSM_HP, 6, seed=13)
    assert a == b


def test_feasibility_pre_checks():
    radio = small_radio()
    bad = SystemGeometry.make(n_m=4, n_k=2, n_rf=4, n_s=2)  # n_rf == n_m
    with pytest.raises(FeasibilityError):
        evaluate_point(bad, radio, CHAN, GSM_HP, 1, seed=0)
    # FDP ignores the RF-chain constraint
    record = evaluate_point(bad, radio, CHAN, FDP, 1, seed=0)
    assert record.scheme == FDP
    with pytest.raises(FeasibilityError):
        evaluate_point(SMALL_GEOM, radio, CHAN, "hybrid", 1, seed=0)
    with pytest.raises(FeasibilityError):
        evaluate_point(SMALL_GEOM, radio, CHAN, GSM_HP, 0, seed=0)


def test_scheme_feasibility_fdp_needs_enough_antennas():
    geom = SystemGeometry.make(n_m=2, n_k=1, n_rf=1, n_s=3)
    assert any("n_s <= n_t" in v for v in scheme_feasibility(geom, FDP))


def test_singular_redraws_are_counted():
    calls = {"n": 0}

    def flaky_factory(drop, geom, params, rng):
        calls["n"] += 1
        if calls["n"] == 1:   # first drawn realization is rank deficient
            h = np.ones((geom.n_s, geom.n_t), dtype=complex)
            return ChannelRealization(
                h_matrix=h, ray_gains=np.zeros((geom.n_s, 1), complex),
                azimuths=np.zeros((geom.n_s, 1)),
                elevations=np.zeros((geom.n_s, 1)), beta=np.ones(geom.n_s))
        return draw_channel(drop, geom, params, rng)

    radio = small_radio()
    record = evaluate_point(SMALL_GEOM, radio, CHAN, GSM_HP, 2000, seed=1,
                            threads=1, channel_factory=flaky_factory)
    assert record.singular_redraws == 1


def test_excessive_singularity_aborts():
    def always_singular(drop, geom, params, rng):
        h = np.ones((geom.n_s, geom.n_t), dtype=complex)
        return ChannelRealization(
            h_matrix=h, ray_gains=np.zeros((geom.n_s, 1), complex),
            azimuths=np.zeros((geom.n_s, 1)), elevations=np.zeros((geom.n_s, 1)),
            beta=np.ones(geom.n_s))

    with pytest.raises(ExcessiveSingularityError):
        evaluate_point(SMALL_GEOM, small_radio(), CHAN, GSM_HP, 10, seed=1,
                       threads=1, channel_factory=always_singular)


def test_one_redraw_aborts_small_runs():
    calls = {"n": 0}

    def flaky_factory(drop, geom, params, rng):
        calls["n"] += 1
        if calls["n"] == 1:
            h = np.ones((geom.n_s, geom.n_t), dtype=complex)
            return ChannelRealization(
                h_matrix=h, ray_gains=np.zeros((geom.n_s, 1), complex),
                azimuths=np.zeros((geom.n_s, 1)),
                elevations=np.zeros((geom.n_s, 1)), beta=np.ones(geom.n_s))
        return draw_channel(drop, geom, params, rng)

    # 1 redraw out of 100 drops is above the 0.1% budget
    with pytest.raises(ExcessiveSingularityError):
        evaluate_point(SMALL_GEOM, small_radio(), CHAN, GSM_HP, 100, seed=1,
                       threads=1, channel_factory=flaky_factory)


def test_geometry_for_each_kind():
    spec = SweepSpec(sweep_kind="users", swept_values=(2, 3), n_m=4, n_k=2, n_rf=3)
    assert geometry_for(spec, 3).n_s == 3
    spec = SweepSpec(sweep_kind="rf_chains", swept_values=(2, 3), n_m=4, n_k=2,
                     k_users=2)
    assert geometry_for(spec, 3).n_rf == 3
    spec = SweepSpec(sweep_kind="antennas_per_group", swept_values=(2, 4), n_m=4,
                     n_rf=3, k_users=2)
    g = geometry_for(spec, 4)
    assert (g.n_k, g.n_t) == (4, 16)
    spec = SweepSpec(sweep_kind="custom", swept_values=(5, 6), swept_param="nm",
                     n_k=2, n_rf=3, k_users=2)
    assert geometry_for(spec, 6).n_m == 6
    with pytest.raises(FeasibilityError):
        geometry_for(spec, 5.5)


def test_sweep_spec_validation():
    with pytest.raises(FeasibilityError):
        SweepSpec(sweep_kind="users", swept_values=())
    with pytest.raises(FeasibilityError):
        SweepSpec(sweep_kind="users", swept_values=(3, 2))
    with pytest.raises(FeasibilityError):
        SweepSpec(sweep_kind="users", swept_values=(2,), schemes=("gsm",))
    with pytest.raises(FeasibilityError):
        SweepSpec(sweep_kind="custom", swept_values=(2,))
    with pytest.raises(FeasibilityError):
        SweepSpec(sweep_kind="users", swept_values=(2,), n_drops=0)
    with pytest.raises(FeasibilityError):
        default_sweep("custom")


def test_default_sweep_presets():
    assert default_sweep("users").swept_values == tuple(range(2, 13))
    assert default_sweep("rf_chains").swept_values == tuple(range(8, 16))
    assert default_sweep("antennas_per_group").swept_values == (2, 4, 8, 16)
    assert default_sweep("computation_power_vs_users").swept_values == tuple(range(2, 11))


def test_run_sweep_skips_infeasible_points():
    spec = SweepSpec(sweep_kind="users", swept_values=(2, 3), n_m=4, n_k=2, n_rf=2,
                     n_drops=2, schemes=(GSM_HP,))
    skipped = []
    records = run_sweep(spec, small_radio(), CHAN,
                        on_skip=lambda v, s, why: skipped.append((v, s, why)))
    # K=3 > n_rf=2 is infeasible for spatial modulation
    assert [r.swept_value for r in records] == [2.0]
    assert skipped and skipped[0][0] == 3 and "n_s <= n_rf" in skipped[0][2]


def test_run_sweep_fdp_constant_across_rf_chains():
    spec = SweepSpec(sweep_kind="rf_chains", swept_values=(2, 3), n_m=4, n_k=2,
                     k_users=2, n_drops=3)
    records = run_sweep(spec, small_radio(), CHAN)
    fdp = [r for r in records if r.scheme == FDP]
    assert len(fdp) == 2
    assert fdp[0].r_total_bps == fdp[1].r_total_bps
    assert fdp[0].power == fdp[1].power
    gsm = [r for r in records if r.scheme == GSM_HP]
    assert gsm[0].r_total_bps != gsm[1].r_total_bps


def test_write_csv_schema_and_determinism(tmp_path):
    spec = SweepSpec(sweep_kind="users", swept_values=(2,), n_m=4, n_k=2, n_rf=2,
                     n_drops=2)
    records = run_sweep(spec, small_radio(), CHAN)
    path_a = tmp_path / "a.csv"
    path_b = tmp_path / "b.csv"
    write_csv(records, path_a)
    write_csv(run_sweep(spec, small_radio(), CHAN), path_b)
    assert path_a.read_bytes() == path_b.read_bytes()
    lines = path_a.read_text().splitlines()
    assert lines[0] == CSV_HEADER
    assert len(lines) == 1 + len(records)
    assert lines[1].startswith("users,2,gsm-hp,2,")


def test_csv_self_consistency(tmp_path):
    spec = SweepSpec(sweep_kind="users", swept_values=(2,), n_m=4, n_k=2, n_rf=2,
                     n_drops=2)
    path = tmp_path / "c.csv"
    write_csv(run_sweep(spec, small_radio(), CHAN), path)
    header, *rows = path.read_text().splitlines()
    columns = header.split(",")
    for row in rows:
        values = dict(zip(columns, row.split(",")))
        rate = float(values["r_total_bps"])
        p_total = float(values["p_total_w"])
        assert float(values["ee_bit_per_joule"]) == pytest.approx(
            rate / p_total, rel=1e-7)
        parts = [float(values[c]) for c in
                 ("p_ce_w", "p_cd_w", "p_bb_w", "p_lp_c_w")]
        assert float(values["p_computation_w"]) == pytest.approx(
            math.fsum(parts), rel=1e-7)


def test_write_csv_rejects_empty(tmp_path):
    with pytest.raises(ValueError):
        write_csv([], tmp_path / "x.csv")


def test_write_csv_io_error(tmp_path):
    spec = SweepSpec(sweep_kind="users", swept_values=(2,), n_m=4, n_k=2, n_rf=2,
                     n_drops=1)
    records = run_sweep(spec, small_radio(), CHAN)
    with pytest.raises(OSError, match="no/such"):
        write_csv(records, tmp_path / "no" / "such" / "dir.csv")


def test_record_flat_dict_round_trip():
    spec = SweepSpec(sweep_kind="users", swept_values=(2,), n_m=4, n_k=2, n_rf=2,
                     n_drops=1)
    record = run_sweep(spec, small_radio(), CHAN)[0]
    assert SweepRecord.from_flat_dict(record.to_flat_dict()) == record
    assert set(CSV_COLUMNS) <= set(record.to_flat_dict())


def test_ee_identity_holds_exactly():
    record = evaluate_point(SMALL_GEOM, small_radio(), CHAN, GSM_HP, 3, seed=2)
    assert record.ee_bit_per_joule == record.r_total_bps / record.power.p_total_w
