import json
import math

import numpy as np
import pytest

from normkam.errors import (
    FrequencyMismatch,
    InvalidEntry,
    InvalidFrequency,
    NotNearIdentity,
)
from normkam.series import (
    FourierTaylorSeries,
    StripDomain,
    compose_map,
    l1_norm,
    make_series,
    multiply,
    project_mean,
    project_zero_mean,
    reflect_angle,
    shift_angle,
    strip_norm,
)

from conftest import random_series, series_equal

FREQ = (1.0,)


def cos_r(order=1, order_max=8, cutoff=8, amp=1.0):
    return make_series(FREQ, {(order, 1): amp / 2, (order, -1): amp / 2},
                       order_max, cutoff)


def sin_r(order=1, order_max=8, cutoff=8, amp=1.0):
    return make_series(FREQ, {(order, 1): -0.5j * amp, (order, -1): 0.5j * amp},
                       order_max, cutoff)


class TestMakeSeries:
    def test_reality_symmetric_pair(self):
        s = cos_r()
        assert s.order_min == 1
        assert s.evaluate(0.0, 1.0) == pytest.approx(1.0, abs=1e-15)
        assert s.evaluate(math.pi / 2, 1.0) == pytest.approx(0.0, abs=1e-15)

    def test_empty_entries_is_zero(self):
        s = make_series(FREQ, {}, 4, 4)
        assert s.is_zero
        assert s.order_min == 0

    def test_one_sided_entry_symmetrized(self):
        # (2, +1): i/2 symmetrizes to (i/4, -i/4), i.e. -(1/2) sin(theta) r^2
        s = make_series(FREQ, {(2, 1): 0.5j}, 4, 4)
        assert s.coefficient(2, 1) == pytest.approx(0.25j)
        assert s.coefficient(2, -1) == pytest.approx(-0.25j)
        assert s.evaluate(math.pi / 2, 1.0) == pytest.approx(-0.5, abs=1e-15)

    def test_cutoff_violations(self):
        with pytest.raises(InvalidEntry):
            make_series(FREQ, {(9, 0): 1.0}, 4, 4)
        with pytest.raises(InvalidEntry):
            make_series(FREQ, {(1, 9): 1.0}, 4, 4)

    def test_bad_frequency(self):
        with pytest.raises(InvalidFrequency):
            make_series((), {}, 4, 4)
        with pytest.raises(InvalidFrequency):
            make_series((0.0,), {}, 4, 4)


class TestMultiply:
    def test_product_to_sum_identity(self):
        # (r cos)^2 = r^2 (1 + cos 2theta)/2
        sq = multiply(cos_r(), cos_r())
        assert sq.coefficient(2, 0) == pytest.approx(0.5)
        assert sq.coefficient(2, 2) == pytest.approx(0.25)
        assert sq.coefficient(2, -2) == pytest.approx(0.25)
        assert sq.order_min == 2

    def test_zero_absorbs(self):
        z = FourierTaylorSeries.zeros(FREQ, 8, 8)
        assert multiply(z, cos_r()).is_zero

    def test_brute_force_convolution_oracle(self):
        # (r + r^2 e^{i theta} + c.c.)^2, coefficient at (k=3, j=1) equals 2
        s = make_series(FREQ, {(1, 0): 1.0, (2, 1): 1.0, (2, -1): 1.0}, 8, 8)
        sq = multiply(s, s)
        # independent dense convolution over the coefficient table
        table = dict(s.items())
        conv = {}
        for (k1, j1), a in table.items():
            for (k2, j2), b in table.items():
                key = (k1 + k2, (j1[0] + j2[0],))
                conv[key] = conv.get(key, 0.0) + a * b
        for (k, j), v in conv.items():
            if k <= 8 and abs(j[0]) <= 8:
                assert sq.coefficient(k, j) == pytest.approx(v, abs=1e-15)
        assert sq.coefficient(3, 1) == pytest.approx(2.0)

    def test_frequency_mismatch(self):
        a = cos_r()
        b = make_series((2.0,), {(1, 1): 0.5, (1, -1): 0.5}, 8, 8)
        with pytest.raises(FrequencyMismatch):
            multiply(a, b)

    def test_truncation_loss_recorded(self):
        s = make_series(FREQ, {(3, 0): 1.0}, 4, 4)
        sq = multiply(s, s)  # order 6 > 4 is dropped
        assert sq.is_zero
        assert sq.truncation_loss == pytest.approx(1.0)


class TestCompose:
    def test_linear_substitution(self):
        phi = make_series(FREQ, {(1, 0): 1.0}, 8, 8)  # phi = r
        v = random_series(np.random.default_rng(1), order_max=8, cutoff=8,
                          order_min=2)
        out = compose_map(phi, phi.zero_like(), v)
        assert series_equal(out, phi + v, atol=1e-15)

    def test_binomial(self):
        phi = make_series(FREQ, {(2, 0): 1.0}, 8, 8)   # r^2
        v = make_series(FREQ, {(3, 0): 1.0}, 8, 8)     # r^3
        out = compose_map(phi, phi.zero_like(), v)
        expect = make_series(FREQ, {(2, 0): 1.0, (4, 0): 2.0, (6, 0): 1.0}, 8, 8)
        assert series_equal(out, expect, atol=1e-15)

    def test_angle_shift_by_r2(self):
        # phi = r cos(theta), u = r^2: phi(theta + r^2) = r cos th - r^3 sin th + ...
        phi = cos_r(order_max=9, cutoff=8)
        u = make_series(FREQ, {(2, 0): 1.0}, 9, 8)
        out = compose_map(phi, u, phi.zero_like())
        assert out.coefficient(3, 1) == pytest.approx(0.5j, abs=1e-15)
        assert out.coefficient(3, -1) == pytest.approx(-0.5j, abs=1e-15)
        # pointwise oracle: evaluate the substitution directly; r small enough
        # that the dropped order-11 remainder sits below the tolerance
        for theta in (0.3, 1.7, 4.0):
            for r in (0.05, 0.15):
                direct = phi.evaluate(theta + u.evaluate(theta, r), r)
                assert out.evaluate(theta, r) == pytest.approx(direct, abs=1e-10)

    def test_near_identity_required(self):
        phi = cos_r()
        bad = make_series(FREQ, {(0, 1): 0.5, (0, -1): 0.5}, 8, 8)
        with pytest.raises(NotNearIdentity):
            compose_map(phi, bad, phi.zero_like())


class TestAngleOps:
    def test_shift_fixes_theta_independent(self):
        s = make_series(FREQ, {(2, 0): 3.0}, 4, 4)
        assert series_equal(shift_angle(s, 1.234), s)

    def test_shift_cos_by_pi(self):
        assert series_equal(shift_angle(cos_r(), math.pi), cos_r(amp=-1.0),
                            atol=1e-15)

    def test_shift_evaluates(self):
        s = shift_angle(cos_r(), 1.0)
        assert s.evaluate(0.0, 1.0) == pytest.approx(math.cos(1.0), abs=1e-15)

    def test_reflect_even_odd(self):
        assert series_equal(reflect_angle(cos_r()), cos_r())
        assert series_equal(reflect_angle(sin_r()), sin_r(amp=-1.0))

    def test_even_part_extraction(self):
        s = cos_r() + sin_r()
        doubled = reflect_angle(s) + s
        assert series_equal(doubled, cos_r(amp=2.0), atol=1e-16)


class TestProjections:
    def test_split_example(self):
        s = make_series(FREQ, {(2, 0): 3.0, (2, 1): 0.5, (2, -1): 0.5}, 4, 4)
        mean = project_mean(s)
        osc = project_zero_mean(s)
        assert mean.coefficient(2, 0) == 3.0
        assert osc.coefficient(2, 0) == 0.0
        assert osc.coefficient(2, 1) == 0.5

    def test_constant_has_no_oscillation(self):
        s = make_series(FREQ, {(1, 0): 2.0}, 4, 4)
        assert project_zero_mean(s).is_zero

    def test_direct_sum_exact(self, rng):
        s = random_series(rng)
        assert series_equal(project_mean(s) + project_zero_mean(s), s)


class TestStripNorm:
    def test_zero(self):
        dom = StripDomain(0.5, 0.5)
        assert strip_norm(FourierTaylorSeries.zeros(FREQ, 4, 4), dom) == 0.0

    def test_single_term(self):
        s = make_series(FREQ, {(2, 0): 1.0}, 4, 4)
        assert strip_norm(s, StripDomain(0.3, 0.5)) == pytest.approx(0.25)

    def test_hand_summed_majorant(self):
        # cos(theta) r, t = ln 2, rho = 1/2: two modes, each 0.5 * 2 * 0.5
        s = cos_r(order_max=4, cutoff=4)
        assert strip_norm(s, StripDomain(math.log(2.0), 0.5)) == pytest.approx(1.0)

    def test_domain_validation(self):
        with pytest.raises(ValueError):
            StripDomain(1.5, 0.5)
        with pytest.raises(ValueError):
            StripDomain(0.5, 0.0)


class TestSerialization:
    def test_round_trip_bit_exact(self, rng):
        s = random_series(rng, n_terms=12)
        back = FourierTaylorSeries.from_json(s.to_json())
        assert series_equal(s, back)
        assert s.to_json() == back.to_json()

    def test_awkward_floats_round_trip(self):
        s = make_series(FREQ, {(1, 1): complex(1 / 3, -1e-155),
                               (3, 0): 1e300 * 1e-300}, 4, 4)
        back = FourierTaylorSeries.from_json(s.to_json())
        assert series_equal(s, back)

    def test_sorted_key_order(self):
        s = make_series(FREQ, {(2, 1): 1.0, (1, -1): 2.0, (2, -1): 1.0,
                               (1, 1): 2.0}, 4, 4)
        obj = s.to_json_obj()
        keys = [(c["k"], tuple(c["j"])) for c in obj["coeffs"]]
        assert keys == sorted(keys)

    def test_schema_fields(self):
        obj = json.loads(cos_r().to_json())
        assert set(obj) == {"freq", "order_max", "cutoff", "coeffs"}
        assert set(obj["coeffs"][0]) == {"k", "j", "re", "im"}
