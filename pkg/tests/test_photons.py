import math

import numpy as np
import pytest
from scipy import integrate, stats

from dualpinhole import analytic as an
from dualpinhole import photons as ph
from dualpinhole.field import IrradianceProfile
from dualpinhole.propagation import wire_grid


@pytest.fixture(scope="module")
def profiles(config):
    return ph.source_profiles(config)


@pytest.fixture(scope="module")
def model(config):
    return an.FringeModel(config.u, config.s)


@pytest.fixture(scope="module")
def coherent_draws(profiles):
    return ph.sample(profiles[0], 100_000, seed=1, source="coherent").positions


def quadrature_cdf(model, s, fn=an.coherent_irradiance, n=200_001):
    x = np.linspace(-s, s, n)
    c = integrate.cumulative_trapezoid(fn(x, model), x, initial=0.0)
    return lambda t: np.interp(t, x, c / c[-1])


class TestSample:
    def test_empty(self, profiles):
        s = ph.sample(profiles[0], 0, seed=3)
        assert s.count == 0 and s.positions.size == 0

    def test_negative_count(self, profiles):
        with pytest.raises(ValueError):
            ph.sample(profiles[0], -1)

    def test_zero_flux(self):
        with pytest.raises(ValueError, match="zero-flux"):
            ph.sample(IrradianceProfile(np.zeros(16), 0.0, 1.0), 5)

    def test_delta_profile(self):
        y = np.zeros(32)
        y[11] = 3.0
        prof = IrradianceProfile(y, -1.0, 0.1)
        pos = ph.sample(prof, 5000, seed=0).positions
        centre = prof.coords[11]
        # the linear interpolant of a single spike is the hat over its two neighbouring cells
        assert np.all(np.abs(pos - centre) <= prof.spacing + 1e-12)

    def test_same_seed_identical(self, profiles):
        a = ph.sample(profiles[0], 1000, seed=(42, 0, 1000, 7)).positions
        b = ph.sample(profiles[0], 1000, seed=(42, 0, 1000, 7)).positions
        assert a.tobytes() == b.tobytes()

    def test_different_seeds_same_distribution(self, profiles):
        a = ph.sample(profiles[0], 20_000, seed=1).positions
        b = ph.sample(profiles[0], 20_000, seed=2).positions
        assert not np.array_equal(a, b)
        assert stats.ks_2samp(a, b).pvalue > 1e-3

    def test_within_support(self, config, coherent_draws):
        assert np.all(np.abs(coherent_draws) <= config.s)

    def test_ks_against_quadrature(self, config, model, coherent_draws):
        res = stats.kstest(coherent_draws, quadrature_cdf(model, config.s))
        assert res.statistic < 0.01

    def test_dark_fringe_avoidance(self, config, coherent_draws):
        near = np.abs(coherent_draws - config.u / 2) <= config.wire_thickness_m / 2
        assert near.mean() < 1e-3

    def test_wire_intervals_nearly_empty(self, config, coherent_draws):
        hits = sum(np.count_nonzero((coherent_draws >= lo) & (coherent_draws <= hi)) for lo, hi in wire_grid(config).intervals())
        assert hits < 0.002 * coherent_draws.size

    def test_decoherent_fills_dark_fringes(self, config, profiles):
        pos = ph.sample(profiles[1], 100_000, seed=5).positions
        hits = sum(np.count_nonzero((pos >= lo) & (pos <= hi)) for lo, hi in wire_grid(config).intervals())
        assert hits > 0.05 * pos.size

    def test_2d(self):
        x = np.linspace(-1, 1, 65)
        X, Y = np.meshgrid(x, x)
        prof = IrradianceProfile(np.exp(-((X - 0.3) ** 2 + (Y + 0.2) ** 2) / 0.02), x[0], x[1] - x[0])
        pos = ph.sample(prof, 20_000, seed=9).positions
        assert pos.shape == (20_000, 2)
        assert pos[:, 0].mean() == pytest.approx(0.3, abs=0.01)
        assert pos[:, 1].mean() == pytest.approx(-0.2, abs=0.01)


class TestLikelihood:
    def test_empty(self, profiles):
        assert ph.log_likelihood_ratio(np.empty(0), *profiles) == 0.0

    def test_bright_peak(self, profiles):
        assert ph.log_likelihood_ratio(np.array([0.0]), *profiles) == pytest.approx(math.log(2), rel=0.01)

    def test_dark_fringe_is_floored(self, config, model):
        # grid with a node exactly on u/2, where the coherent density is exactly 0
        h = config.u / 2000
        m = int(config.s / h)
        x = np.arange(-m, m + 1) * h
        coh, dec = an.coherent_profile(x, model), an.decoherent_profile(x, model)
        dot = np.array([x[m + 1000]])
        assert coh.values[m + 1000] == 0.0
        lam = ph.log_likelihood_ratio(dot, coh, dec)
        floor = ph.DENSITY_FLOOR / (x[-1] - x[0])
        p_dec = dec.values[m + 1000] / dec.integral()
        assert lam == pytest.approx(math.log(floor / p_dec), rel=1e-9)
        assert lam < -20

    def test_outside_support(self, config, profiles):
        with pytest.raises(ValueError, match="support"):
            ph.log_likelihood_ratio(np.array([2 * config.s]), *profiles)

    def test_mean_grows_with_kl_slope(self, profiles):
        coh, dec = profiles
        kl = ph.kl_divergence(coh, dec)
        # independent Monte Carlo oracle: per-photon contributions from 10^4 single dots
        single = ph.sample(coh, 10_000, seed=11).positions
        per_photon = np.array([ph.log_likelihood_ratio(x[None], coh, dec) for x in single[:2000]])
        assert per_photon.mean() == pytest.approx(kl, abs=5 * per_photon.std() / math.sqrt(per_photon.size))
        for n in (10, 40):
            lams = [ph.log_likelihood_ratio(ph.sample(coh, n, seed=(11, n, t)), coh, dec) for t in range(500)]
            se = np.std(lams) / math.sqrt(len(lams))
            assert np.mean(lams) == pytest.approx(n * kl, abs=5 * se)


class TestAccuracy:
    def single_photon_oracle(self, config):
        from scipy.special import j1

        u, s = config.u, config.s

        def dec(t):
            b = an.AIRY_FIRST_ZERO * t / s
            return 0.5 if b == 0 else 2 * (j1(b) / b) ** 2

        def coh(t):
            return 2 * math.cos(math.pi * t / u) ** 2 * dec(t)

        pts = np.arange(-s, s, u / 4)
        norm_c = integrate.quad(coh, -s, s, limit=2000, points=pts)[0]
        norm_d = integrate.quad(dec, -s, s, limit=2000, points=pts)[0]

        def own(t):
            c, d = coh(t) / norm_c, dec(t) / norm_d
            return c if c > d else 0.0

        return integrate.quad(own, -s, s, limit=2000, points=pts)[0]

    def test_single_photon_matches_quadrature(self, config, profiles):
        oracle = self.single_photon_oracle(config)
        assert ph.single_photon_accuracy(*profiles)["coherent"] == pytest.approx(oracle, abs=2e-3)
        table = ph.buildup_study(config, counts=(1,), trials=4000, seed=3, profiles=profiles)
        se = math.sqrt(oracle * (1 - oracle) / 4000)
        assert table.accuracy["coherent"][1] == pytest.approx(oracle, abs=4 * se)

    @pytest.mark.xfail(strict=True, reason="single-dot accuracy is about 0.82, above the quoted 0.75; see notes")
    def test_single_photon_quoted_bound(self, profiles):
        assert ph.single_photon_accuracy(*profiles)["coherent"] <= 0.75

    def test_buildup_small(self, config, profiles):
        table = ph.buildup_study(config, counts=(3, 30), trials=200, seed=1, profiles=profiles)
        for src in ph.SOURCES:
            assert table.accuracy[src][3] < table.accuracy[src][30]
        assert table.generator == ph.GENERATOR
        assert set(table.dots) == {(s, n) for s in ph.SOURCES for n in (3, 30)}
        assert table.to_json_dict()["accuracy"]["coherent"].keys() == {"3", "30"}

    def test_buildup_deterministic(self, config, profiles):
        a = ph.buildup_study(config, counts=(10,), trials=100, seed=5, profiles=profiles)
        b = ph.buildup_study(config, counts=(10,), trials=100, seed=5, profiles=profiles)
        assert a.to_json_dict() == b.to_json_dict()
        assert a.dots[("coherent", 10)].tobytes() == b.dots[("coherent", 10)].tobytes()

    def test_trials_minimum(self, config):
        with pytest.raises(ValueError, match="100"):
            ph.buildup_study(config, trials=99)
