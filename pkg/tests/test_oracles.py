import math

import mpmath
import numpy as np
import pytest

from tmes import (
    MMA,
    ArmaCopula,
    GaussianCopula,
    InsufficientSampleError,
    IntegrationError,
    OracleResult,
    TimeSeriesPair,
    TmesError,
    arma_extremogram_closed_form,
    brute_force_tmes,
    copula_tmes_from_extremogram,
    mma_joint_cdf,
    mma_marginal_cdf,
    mma_marginal_constant,
    mma_marginal_mean,
    mma_quantile,
    mma_tmes_oracle,
    monte_carlo_delta0,
    select_threshold,
    simulate_pair,
)

# Frozen MMA oracle values at xi = 4, phi = 0.8, m_n = 20, lags 0..9.
# Regression anchors produced by mma_tmes_oracle; their correctness is
# argued by the checks below (marginal limit, simulation agreement).
MMA_DELTA = [4.0581, 3.8017, 3.3796, 2.9649, 2.6291, 2.3835, 2.2151, 2.1032, 2.0298, 1.9817]


# -- MMA marginal ---------------------------------------------------------

def test_marginal_constant_spot_value():
    assert mma_marginal_constant(4.0, 0.8) == pytest.approx(5.7003, abs=1e-3)


def test_marginal_constant_against_series():
    with mpmath.workdps(40):
        q = mpmath.mpf("0.8") ** 4
        series = 1 + mpmath.nsum(lambda j: 4 * j * q**j, [1, mpmath.inf])
    assert mma_marginal_constant(4.0, 0.8) == pytest.approx(float(series), rel=1e-13)


def test_marginal_cdf_quantile_mean():
    c = mma_marginal_constant(4.0, 0.8)
    assert mma_marginal_cdf(1.0, 4.0, 0.8) == pytest.approx(math.exp(-c))
    assert mma_marginal_cdf(-1.0, 4.0, 0.8) == 0.0
    a = mma_quantile(0.95, 4.0, 0.8)
    assert mma_marginal_cdf(a, 4.0, 0.8) == pytest.approx(0.95)
    assert mma_marginal_mean(4.0, 0.8) == pytest.approx(c**0.25 * math.gamma(0.75))
    with pytest.raises(TmesError):
        mma_marginal_mean(1.0, 0.8)


# -- MMA joint CDF --------------------------------------------------------

def test_joint_cdf_marginal_limit():
    for h in (0, 1, 5):
        assert mma_joint_cdf(2.0, math.inf, h, 4.0, 0.8) == pytest.approx(
            mma_marginal_cdf(2.0, 4.0, 0.8), rel=1e-9
        )


def test_joint_cdf_decouples_at_long_lags():
    f = mma_marginal_cdf(2.0, 4.0, 0.8)
    assert mma_joint_cdf(2.0, 2.0, 200, 4.0, 0.8) == pytest.approx(f * f, rel=1e-9)


def test_joint_cdf_nonpositive_arguments():
    assert mma_joint_cdf(0.0, 1.0, 1, 4.0, 0.8) == 0.0


def test_joint_cdf_against_simulation():
    ts = simulate_pair(MMA(), 100_000, seed=21)
    h = 1
    freq = np.mean((ts.x[h:] <= 2.0) & (ts.y[:-h] <= 2.0))
    assert freq == pytest.approx(mma_joint_cdf(2.0, 2.0, h, 4.0, 0.8), abs=0.01)


# -- MMA TMES oracle ------------------------------------------------------

@pytest.mark.parametrize("h", range(10))
def test_mma_oracle_frozen_values(h):
    res = mma_tmes_oracle(h)
    assert res.method == "numeric_integral"
    assert res.value == pytest.approx(MMA_DELTA[h], abs=1e-4)
    assert res.error_estimate < 1e-4


def test_mma_oracle_is_decreasing_to_marginal_mean():
    far = mma_tmes_oracle(50).value
    assert far == pytest.approx(mma_marginal_mean(4.0, 0.8), rel=1e-6)
    assert all(a > b for a, b in zip(MMA_DELTA, MMA_DELTA[1:]))


def test_mma_oracle_step_refinement_is_stable():
    base = mma_tmes_oracle(2).value
    fine = mma_tmes_oracle(2, step=2.5e-4 * mma_quantile(0.95, 4.0, 0.8)).value
    assert fine == pytest.approx(base, abs=1e-6)


def test_mma_oracle_against_simulation():
    """Pooled exceedance means from paths at a fixed level a (no order-statistic noise)."""
    a = mma_quantile(0.95, 4.0, 0.8)
    vals = {0: [], 3: []}
    for p in range(12):
        ts = simulate_pair(MMA(), 20_000, seed=300 + p)
        for h in vals:
            hit = ts.y[: ts.n - h] > a
            vals[h].append(ts.x[h:][hit])
    for h, chunks in vals.items():
        pooled = np.concatenate(chunks)
        se = pooled.std(ddof=1) / math.sqrt(pooled.size) * 3  # clusters inflate the SE
        assert pooled.mean() == pytest.approx(MMA_DELTA[h], abs=4 * se)


def test_mma_oracle_needs_finite_mean():
    with pytest.raises(IntegrationError):
        mma_tmes_oracle(0, xi=1.0)
    with pytest.raises(TmesError):
        mma_tmes_oracle(0, m_n=1)


# -- ARMA extremogram -----------------------------------------------------

def _arma_extremogram_mp(h, phi, theta, xi, terms=3000):
    """Tail-dependence sum over MA(inf) weights psi_0 = 1, psi_j = (theta+phi) phi^(j-1)."""
    with mpmath.workprec(128):
        phi, theta, xi = mpmath.mpf(phi), mpmath.mpf(theta), mpmath.mpf(xi)
        psi = [mpmath.mpf(1)] + [(theta + phi) * phi ** (j - 1) for j in range(1, terms + h + 1)]
        num = mpmath.fsum(min(psi[j], psi[j + h]) ** xi for j in range(terms))
        den = mpmath.fsum(p**xi for p in psi[:terms])
        return num / den


@pytest.mark.parametrize("h", [1, 2, 3, 7])
def test_arma_closed_form_matches_series(h):
    closed = arma_extremogram_closed_form(h)
    assert closed == pytest.approx(float(_arma_extremogram_mp(h, 0.2, 0.8, 6.0)), rel=1e-12)


def test_arma_closed_form_spot_values():
    assert arma_extremogram_closed_form(0) == 1.0
    assert arma_extremogram_closed_form(1) == pytest.approx(0.500016, abs=1e-6)
    assert arma_extremogram_closed_form(3) < 1e-6
    with pytest.raises(TmesError):
        arma_extremogram_closed_form(-1)


# -- copula decomposition -------------------------------------------------

def test_copula_decomposition():
    assert copula_tmes_from_extremogram(0.5, 1.0, 3.0) == 2.0
    assert copula_tmes_from_extremogram(0.5, 0.0, 3.0, centered=True) == 1.5
    assert copula_tmes_from_extremogram(0.0, 1.0, 3.0) == 1.0
    with pytest.raises(TmesError):
        copula_tmes_from_extremogram(1.5, 0.0, 1.0)


# -- Monte Carlo ----------------------------------------------------------

def test_monte_carlo_comonotone_tail_mean():
    """x comonotone with y: E[X | X > z_0.95] = phi(z) / 0.05 for standard normal X."""
    model = ArmaCopula(copula=GaussianCopula(1.0))
    res = monte_carlo_delta0(model, paths=40, seed=2)
    z = 1.6448536269514722
    target = math.exp(-z * z / 2) / math.sqrt(2 * math.pi) / 0.05
    assert res.method == "monte_carlo" and res.error_estimate > 0
    assert res.value == pytest.approx(target, abs=4 * res.error_estimate + 0.01)


def test_monte_carlo_error_shrinks_with_paths():
    model = ArmaCopula()
    small = monte_carlo_delta0(model, paths=25, seed=5).error_estimate
    large = monte_carlo_delta0(model, paths=100, seed=5).error_estimate
    assert large / small == pytest.approx(0.5, rel=0.25)


def test_monte_carlo_insufficient_sample():
    with pytest.raises(InsufficientSampleError):
        monte_carlo_delta0(ArmaCopula(), paths=2, path_len=200, min_exceedances=1000)


def test_oracle_result_contract():
    with pytest.raises(TmesError):
        OracleResult(1.0, "monte_carlo")
    d = OracleResult(1.0, "closed_form", params={"h": 1}).to_dict()
    assert d == {"value": 1.0, "method": "closed_form", "error_estimate": None, "params": {"h": 1}}


# -- brute force ----------------------------------------------------------

def test_brute_force_ladder(ladder):
    spec = select_threshold(ladder.y, 5)
    assert brute_force_tmes(ladder, spec, 0) == 9.5
    assert brute_force_tmes(ladder, spec, 1) == 5.0
    assert brute_force_tmes(ladder, spec, 9) == 0.0


def test_brute_force_is_exact_on_cancelling_sums():
    x = np.array([1e16, 1.0, -1e16, 1.0])
    ts = TimeSeriesPair(x, np.ones(4))
    spec = select_threshold(ts.y, 1)  # all points exceed
    assert brute_force_tmes(ts, spec, 0) == 0.5
