"""Threshold calibration, the FA/MD bound evaluators, JSON round trips."""

import json
import math
import threading

import numpy as np
import pytest

from specdet import (
    Snr,
    ThresholdTable,
    calibrate,
    calibrate_oracle,
    ccdf,
    pfa_bound,
    pmd_bound,
)


def dyadic(n):
    out = [1]
    while out[-1] < n:
        out.append(out[-1] * 2)
    return out


class TestCalibrate:
    def test_paper_operating_point(self):
        # u_1 = -ln(2e-6 / 1024^2) via the nu=2 closed form
        table = calibrate(1e-6, 1024, [1])
        expected = -math.log(2e-6 / 1024**2)
        assert table.u(1) == pytest.approx(expected, abs=1e-6)
        assert expected == pytest.approx(26.985307, abs=1e-5)

    def test_thresholds_decrease_with_size(self):
        table = calibrate(1e-6, 1024, dyadic(1024))
        us = [table.u(ell) for ell in dyadic(1024)]
        assert all(u2 < u1 for u1, u2 in zip(us, us[1:]))

    def test_calibration_fixed_point(self):
        for pfa in (1e-6, 1e-2):
            table = calibrate(pfa, 256, dyadic(256))
            target = 2.0 * pfa / 256**2
            for ell in dyadic(256):
                assert ccdf(2 * ell * table.u(ell), 2 * ell) == pytest.approx(
                    target, rel=1e-9
                )

    def test_t_equals_ell_phi_u(self):
        table = calibrate(1e-3, 64, dyadic(64))
        for ell in dyadic(64):
            u = table.u(ell)
            assert table.t(ell) == pytest.approx(ell * (u - 1 - math.log(u)), rel=1e-12)

    def test_thresholds_above_one_in_operating_regime(self):
        table = calibrate(1e-2, 64, dyadic(64))
        assert all(table.u(ell) >= 1.0 for ell in dyadic(64))

    def test_lax_target_clamped_to_one(self):
        # 2*pfa/N^2 = 0.45 > ccdf(2; 2) = e^-1, so the raw u_1 dips below 1
        table = calibrate(0.9, 2, [1])
        assert table.u(1) == 1.0
        assert table.t(1) == 0.0

    def test_lazy_extension_and_memoization(self):
        table = calibrate(1e-2, 256, [1])
        assert table.sizes() == [1]
        u17 = table.u(17)
        assert table.sizes() == [1, 17]
        assert table.u(17) == u17

    def test_u_array_matches_scalar_path(self):
        table = calibrate(1e-2, 128, [])
        arr = table.u_array(128)
        probe = calibrate(1e-2, 128, [])
        for ell in [1, 2, 3, 17, 100, 128]:
            assert arr[ell] == pytest.approx(probe.u(ell), rel=1e-12)
        assert arr[0] == np.inf

    def test_invalid_inputs(self):
        with pytest.raises(ValueError):
            calibrate(0.0, 64, [1])
        with pytest.raises(ValueError):
            calibrate(1.5, 64, [1])
        with pytest.raises(ValueError):
            calibrate(1e-2, 64, [0])
        with pytest.raises(ValueError):
            calibrate(1e-2, 64, [65])

    def test_concurrent_lazy_fill(self):
        table = ThresholdTable(1e-2, 1024)
        errors = []

        def worker(span):
            try:
                for ell in span:
                    table.u(ell)
            except Exception as exc:  # pragma: no cover
                errors.append(exc)

        threads = [
            threading.Thread(target=worker, args=(range(1 + k, 257, 4),))
            for k in range(4)
        ]
        for t in threads:
            t.start()
        for t in threads:
            t.join()
        assert not errors
        assert table.sizes() == list(range(1, 257))


class TestPfaBound:
    def test_calibrated_table_recovers_target(self):
        for pfa in (1e-6, 1e-3):
            table = calibrate(pfa, 1024, dyadic(1024))
            assert pfa_bound(table) == pytest.approx(pfa, rel=1e-9)

    def test_zero_thresholds_give_union_count(self):
        table = ThresholdTable(1e-2, 64, entries={ell: 0.0 for ell in dyadic(64)})
        assert pfa_bound(table) == pytest.approx(64**2 / 2.0, rel=1e-12)

    def test_doubling_thresholds_decreases_bound(self):
        base = calibrate(1e-2, 64, dyadic(64))
        doubled = ThresholdTable(
            1e-2, 64, entries={ell: 2 * base.u(ell) for ell in dyadic(64)}
        )
        assert pfa_bound(doubled) < pfa_bound(base)

    def test_empty_table_rejected(self):
        with pytest.raises(ValueError):
            pfa_bound(ThresholdTable(1e-2, 64))


class TestPmdBound:
    def test_gamma_zero_identity(self):
        table = calibrate(1e-2, 256, [16])
        expected = 1.0 - 2e-2 / 256**2
        assert pmd_bound(table, 16, Snr(0.0)) == pytest.approx(expected, rel=1e-9)

    def test_monotone_decreasing_in_gamma(self):
        table = calibrate(1e-2, 256, [16])
        gammas = np.linspace(0.0, 100.0, 50)
        vals = [pmd_bound(table, 16, float(g)) for g in gammas]
        assert all(v2 <= v1 for v1, v2 in zip(vals, vals[1:]))
        assert vals[-1] < 1e-12  # gamma -> inf limit

    def test_decreasing_in_ell_at_fixed_gamma(self):
        table = calibrate(1e-6, 1024, list(range(1, 257)))
        gamma = Snr.from_db(6.0)
        vals = [pmd_bound(table, ell, gamma) for ell in range(1, 257)]
        assert all(v2 <= v1 + 1e-12 for v1, v2 in zip(vals, vals[1:]))

    def test_unknown_ell_rejected(self):
        table = calibrate(1e-2, 64, [16])
        with pytest.raises(ValueError):
            pmd_bound(table, 0, Snr(1.0))
        with pytest.raises(ValueError):
            pmd_bound(table, 65, Snr(1.0))


class TestCalibrateOracle:
    def test_closed_form_unit(self):
        assert calibrate_oracle(math.exp(-1.0), 1) == pytest.approx(1.0, rel=1e-12)

    def test_stringent_target(self):
        assert calibrate_oracle(1e-6, 1) == pytest.approx(-math.log(1e-6), rel=1e-10)
        assert -math.log(1e-6) == pytest.approx(13.815511, abs=1e-5)

    def test_oracle_below_glrt_threshold(self):
        table = calibrate(1e-3, 256, dyadic(256))
        for ell in dyadic(256):
            assert calibrate_oracle(1e-3, ell) < table.u(ell)

    def test_invalid(self):
        with pytest.raises(ValueError):
            calibrate_oracle(0.0, 1)
        with pytest.raises(ValueError):
            calibrate_oracle(1e-3, 0)


class TestJsonRoundTrip:
    def test_export_import(self):
        table = calibrate(1e-6, 1024, dyadic(1024))
        text = table.to_json()
        back = ThresholdTable.from_json(text)
        assert back.pfa == table.pfa
        assert back.n_total == table.n_total
        assert back.sizes() == table.sizes()
        for ell in table.sizes():
            assert back.u(ell) == table.u(ell)

    def test_deterministic_bytes(self):
        a = calibrate(1e-3, 64, dyadic(64)).to_json()
        b = calibrate(1e-3, 64, dyadic(64)).to_json()
        assert a == b

    def test_schema_fields(self):
        data = json.loads(calibrate(1e-3, 16, [1, 4]).to_json())
        assert set(data) == {"pfa", "n_total", "entries"}
        assert [e["ell"] for e in data["entries"]] == [1, 4]
        assert all(set(e) == {"ell", "u", "t"} for e in data["entries"])

    def test_imported_entries_survive_unclamped(self):
        table = ThresholdTable.from_dict(
            {"pfa": 0.5, "n_total": 4, "entries": [{"ell": 1, "u": 0.25, "t": 0.0}]}
        )
        assert table.u(1) == 0.25
