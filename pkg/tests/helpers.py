"""Shared builders and reference constants for the test suite.

Frozen numbers were produced by 30-digit arbitrary-precision evaluation of
the closed forms, or by an independent run of the routine under test whose
inputs are pinned here; they guard against silent regressions.
"""

import numpy as np
from scipy.linalg import expm

from otto3.engine import Engine, EngineParams, FixedCycles, WorkNonNegative
from otto3.propagators import RampMode
from otto3.states import symplectic_form, thermal_preparation

# coth(1/200): occupation factor of the hot mode at beta1 = 0.01, omega1 = 1
C1_BETA_001 = 200.001666663888895502628968296

# (C1_BETA_001 - 1) / 2
NBAR_BETA_001 = 99.500833331944447751

# arccosh(2 * NBAR_BETA_001 + 1) / 2: squeezing that matches the thermal energy
MATCHED_R1 = 2.99573331521913856554927819379

# sinh(1)
SINH_1 = 1.1752011936438014568823818506

# ergotropy of the beta1 = 0.01, omega3 = 0.1 thermal preparation at the
# default spectral tail; independent rerun of the level-enumeration routine
ERGOTROPY_BASELINE = 98.41356992956304

# cumulative work of the pinned quasi-static run below, frozen from a rerun
W_TOTAL_BASELINE = -89.54248376445149

OPT_OMEGA3 = 0.1
OPT_ALPHA12 = 0.038
OPT_ALPHA23 = 1e-4
OPT_TAU_COMP = 85.02
OPT_TAU_H = 0.59
OPT_TAU_C = 0.9996
OPT_BETA1 = 0.01


def optimized_params(stop=None, alpha23=OPT_ALPHA23, ramp=RampMode.QUASI_STATIC):
    """Engine configuration of the pinned work-extraction operating point."""
    return EngineParams(
        prep=thermal_preparation(beta1=OPT_BETA1, omega3=OPT_OMEGA3),
        alpha12=OPT_ALPHA12, alpha23=alpha23,
        tau_comp=OPT_TAU_COMP, tau_h=OPT_TAU_H, tau_c=OPT_TAU_C,
        ramp=ramp, stop=WorkNonNegative() if stop is None else stop)


def random_covariance(rng, n_modes=2, nu_lo=0.5, nu_hi=3.0, strength=0.6):
    """Random physical covariance with known symplectic spectrum.

    A symmetric generator h gives the symplectic S = expm(Omega h); conjugating
    a diagonal of symplectic eigenvalues nu >= 1/2 by S keeps them exact.
    """
    omega = symplectic_form(n_modes)
    h = rng.normal(scale=strength, size=(2 * n_modes, 2 * n_modes))
    h = 0.5 * (h + h.T)
    s = expm(omega @ h)
    nus = rng.uniform(nu_lo, nu_hi, n_modes)
    sigma = s @ np.diag(np.concatenate([nus, nus])) @ s.T
    return 0.5 * (sigma + sigma.T), np.sort(nus)


def local_symplectic(rng, scale=0.7):
    """Direct sum of two independent single-mode symplectics, (x1,x2,p1,p2)."""
    out = np.zeros((4, 4))
    for rows in ((0, 2), (1, 3)):
        h = rng.normal(scale=scale, size=(2, 2))
        h = 0.5 * (h + h.T)
        out[np.ix_(rows, rows)] = expm(symplectic_form(1) @ h)
    return out


def sudden_cycle_work(prep, alpha12, tau_h, tau_c=0.1):
    """Work of one sudden-quench cycle from the given preparation."""
    params = EngineParams(prep=prep, alpha12=alpha12, alpha23=0.0,
                          tau_comp=0.0, tau_h=tau_h, tau_c=tau_c,
                          ramp=RampMode.SUDDEN, stop=FixedCycles(1))
    res = Engine(params).run(want_timeseries=False, correlations=False)
    return res.records[0].w_cycle


def first_law_residuals(records):
    """Relative first-law defect of every cycle record."""
    out = []
    for r in records:
        scale = max(1.0, abs(r.w1) + abs(r.w2))
        out.append(abs(r.w1 + r.w2 - r.q1 - r.q2 - r.du) / scale)
    return np.asarray(out)
