"""Oracle runs that pin the verdict thresholds, plus error and edge cases."""

import json
import math

import pytest

from teichlab.experiments import (EXIT_CODES, LabConfig, RedirectError, boundary_map_audit,
                                  qi_audit, ray_profile, segment_accumulation, separation_profile)
from teichlab.foliation import GOLDEN, SQRT2, ContinuedFraction, Slope, cf_convergents
from teichlab.teich import TeichPoint, geodesic_segment

ZERO = ContinuedFraction(0)
NEG_INV_GOLDEN = ContinuedFraction.parse("[-1;2,(1)]")


def rows(report):
    lines = report.profile_csv.strip().splitlines()
    head = lines[0].split(",")
    return [dict(zip(head, line.split(","))) for line in lines[1:]]


def test_golden_ray_oracle():
    rep = ray_profile(GOLDEN, 12.0)
    assert rep.verdict == "pass" and rep.finding == "diverging"
    # never enters a Thin region at eps = 0.1, so d_el is the Teichmüller distance
    assert rep.metrics["d_el_final"] == pytest.approx(12.0, abs=1e-9)
    assert rep.metrics["crossings"] == 24
    assert rep.metrics["increasing_at_crossings"]


def test_rational_ray_oracle():
    rep = ray_profile(ZERO, 12.0)
    assert rep.verdict == "pass" and rep.finding == "bounded"
    assert rep.metrics["tail_in_thin_region"] and rep.metrics["thin_region"] == "0/1"
    # plateau: reach Thin_0 at t = log(1/eps)/2, then one cone crossing
    assert rep.metrics["d_el_final"] == pytest.approx(0.5 * math.log(10) + 1, abs=0.01)
    assert rep.metrics["tail_oscillation"] <= 1.0


def test_ray_profile_columns():
    rep = ray_profile(GOLDEN, 1.0)
    first = rows(rep)[0]
    assert set(first) == {"t", "x", "y", "d_el", "systole"}
    assert float(first["d_el"]) == 0.0


def test_zero_length_ray():
    rep = ray_profile(ZERO, 0.0)
    assert rep.finding == "bounded" and len(rows(rep)) == 1


def test_ray_rejects_negative_time_and_large_denominators():
    with pytest.raises(ValueError):
        ray_profile(GOLDEN, -1.0)
    with pytest.raises(ValueError):
        ray_profile(ContinuedFraction.from_fraction(__import__("fractions").Fraction(3, 17)), 2.0,
                    LabConfig(denom_bound=8))


def test_separation_oracle():
    rep = separation_profile(GOLDEN, SQRT2)
    assert rep.finding == "separated" and rep.verdict == "pass"
    assert rep.metrics["plateau"] == pytest.approx(1.3867, abs=0.01)


def test_separation_control_diverges():
    rep = separation_profile(GOLDEN, GOLDEN)
    assert rep.finding == "joint" and rep.verdict == "pass"
    assert rep.metrics["last_quarter_slope"] > 0.1


def test_separation_from_shifted_tail():
    shifted = SQRT2.shifted()
    assert float(shifted) != float(SQRT2)
    assert separation_profile(SQRT2, shifted).finding == "separated"


def test_rational_inputs_redirect():
    with pytest.raises(RedirectError, match="ray_profile"):
        separation_profile(GOLDEN, ZERO)
    with pytest.raises(RedirectError):
        segment_accumulation(ZERO, GOLDEN)


def test_segments_converge_to_limit_line():
    rep = segment_accumulation(GOLDEN, NEG_INV_GOLDEN)
    assert rep.verdict == "pass" and rep.finding == "converging"
    assert rep.metrics["endpoint_error"] <= 1e-6
    assert rep.metrics["limit_endpoints"] == pytest.approx([-(1 + 5**0.5) / 2, (5**0.5 - 1) / 2])
    prof = [float(r["hausdorff"]) for r in rows(rep)]
    assert prof[-1] < prof[0]


def test_segments_on_one_ray_escape():
    rep = segment_accumulation(GOLDEN, GOLDEN)
    assert rep.finding == "escaping" and rep.metrics["hausdorff_final"] is None


def test_single_segment_is_echoed():
    rep = segment_accumulation(GOLDEN, SQRT2, n=1)
    assert len(rows(rep)) == 1 and rep.verdict == "inconclusive"


def test_qi_audit_small_bound():
    rep = qi_audit(1)
    m = rep.metrics
    assert rep.verdict == "pass"
    assert math.isfinite(m["k"]) and math.isfinite(m["mu"])
    # adjacent Thin regions sit log(1/eps) apart, not within 2
    assert m["adjacent_thin_distance_max"] == pytest.approx(math.log(10), rel=0.01)


def test_thick_geodesic_is_nearly_isometric():
    g = geodesic_segment(TeichPoint(-1.0, 1.0), TeichPoint(0.3, 1.0), 30)
    rep = qi_audit(3, n_geodesics=0, extra_geodesics=[g])
    (k, mu), = rep.metrics["quasigeodesic_fits"]
    assert k == 1.0 and mu <= 1.0


def test_qi_audit_rejects_small_windows():
    from teichlab.net import BoxWindow
    with pytest.raises(ValueError, match="widen"):
        qi_audit(5, window=BoxWindow(-1.5, 0.5, 0.5, 30.0), n_geodesics=1)


def test_boundary_map_golden_convergents():
    seq, _ = cf_convergents(GOLDEN, 16)
    rep = boundary_map_audit(seq)
    assert rep.verdict == "pass" and rep.metrics["farey_verdict"] == "diverging"
    assert rep.metrics["limit_estimate"] == pytest.approx((1 + 5**0.5) / 2, abs=1e-5)


def test_boundary_map_constant_sequence():
    rep = boundary_map_audit([Slope(2, 5)] * 6)
    assert rep.metrics["farey_verdict"] == "bounded"


def test_boundary_map_interleaved():
    a, _ = cf_convergents(GOLDEN, 10)
    b, _ = cf_convergents(SQRT2, 10)
    rep = boundary_map_audit([v for pair in zip(a, b) for v in pair])
    assert rep.metrics["farey_verdict"] in ("bounded", "inconclusive")
    assert rep.finding != "converges to an irrational"


def test_boundary_map_errors():
    with pytest.raises(ValueError):
        boundary_map_audit([Slope(1, 2), Slope(1, 3)])
    with pytest.raises(ValueError, match="widen"):
        boundary_map_audit([Slope(1, 2), Slope(1, 3), Slope(1, 40)], denom_bound=10)


@pytest.mark.parametrize("run", [
    lambda: ray_profile(GOLDEN, 3.0),
    lambda: separation_profile(GOLDEN, SQRT2, 8),
    lambda: segment_accumulation(GOLDEN, SQRT2, 6),
    lambda: boundary_map_audit(cf_convergents(GOLDEN, 8)[0]),
])
def test_reports_are_deterministic(run):
    a = run().to_json()
    b = run().to_json()
    assert a == b
    data = json.loads(a)
    assert data["verdict"] in EXIT_CODES and "seed" in data["provenance"]
