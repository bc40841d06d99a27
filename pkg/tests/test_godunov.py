"""Finite-volume scheme: fluxes, field splitting, stepping, refinement."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import nlftl as nl
from nlftl.godunov import KernelTables, cfl_dt, compute_fields

MOB = nl.Mobility()
KER = nl.Kernel()


def oracle_fields(grid, rho, kernel):
    """Direct double-loop midpoint convolutions at cell centers."""
    j_cells = len(rho)
    xc = grid.centers
    kplus = np.zeros(j_cells)
    kminus = np.zeros(j_cells)
    dk = np.zeros(j_cells)
    for j in range(j_cells):
        for m in range(j_cells):
            w = kernel.d1(xc[j] - xc[m]) * rho[m] * grid.dx
            if xc[m] <= xc[j]:
                kplus[j] += w
            else:
                kminus[j] += w
            dk[j] += kernel.d2(xc[j] - xc[m]) * rho[m] * grid.dx
    return kplus, kminus, dk


def oracle_godunov_flux(u_left, u_right, mob):
    sigma = mob.flux_argmax
    if u_left <= u_right:
        return min(mob.flux(u_left), mob.flux(u_right))
    if u_right <= sigma <= u_left:
        return mob.flux_max
    return max(mob.flux(u_left), mob.flux(u_right))


def oracle_step(grid, rho, kernel, mob, dt):
    """Spelled-out transcription of the update formula, one cell at a time."""
    kplus, kminus, dk = oracle_fields(grid, rho, kernel)
    ext = np.concatenate(([0.0], rho, [0.0]))
    new = np.empty_like(rho)
    for j in range(len(rho)):
        fp_right = oracle_godunov_flux(ext[j + 2], ext[j + 1], mob)  # mirrored order
        fp_left = oracle_godunov_flux(ext[j + 1], ext[j], mob)
        fm_right = oracle_godunov_flux(ext[j + 1], ext[j + 2], mob)
        fm_left = oracle_godunov_flux(ext[j], ext[j + 1], mob)
        upd = (
            kplus[j] * (fp_right - fp_left) / grid.dx
            + kminus[j] * (fm_right - fm_left) / grid.dx
            + mob.flux(rho[j]) * dk[j]
        )
        new[j] = min(max(rho[j] + dt * upd, 0.0), mob.cap)
    return new


# ------------------------------------------------------------------- fluxes

def test_flux_consistency_on_grid():
    us = np.linspace(0.0, 1.0, 101)
    assert nl.godunov_flux(us, us, MOB) == pytest.approx(MOB.flux(us), abs=1e-16)


def test_flux_riemann_cases():
    assert nl.godunov_flux(0.8, 0.2, MOB) == pytest.approx(0.25, abs=1e-16)
    assert nl.godunov_flux(0.0, 1.0, MOB) == 0.0
    assert nl.godunov_flux(1.0, 0.0, MOB) == pytest.approx(0.25, abs=1e-16)
    # out-of-range states are clamped, not rejected
    assert nl.godunov_flux(-0.1, 1.3, MOB) == 0.0


@settings(max_examples=200, deadline=None)
@given(
    st.floats(min_value=0.0, max_value=1.0),
    st.floats(min_value=0.0, max_value=1.0),
    st.floats(min_value=0.0, max_value=1.0),
)
def test_flux_monotone_in_both_arguments(u_left, u_right, other):
    low, high = sorted((u_left, other))
    assert nl.godunov_flux(high, u_right, MOB) >= nl.godunov_flux(low, u_right, MOB) - 1e-15
    assert nl.godunov_flux(u_left, high, MOB) <= nl.godunov_flux(u_left, low, MOB) + 1e-15


@settings(max_examples=200, deadline=None)
@given(st.floats(min_value=0.0, max_value=1.0), st.floats(min_value=0.0, max_value=1.0))
def test_flux_matches_case_oracle(u_left, u_right):
    assert nl.godunov_flux(u_left, u_right, MOB) == pytest.approx(
        oracle_godunov_flux(u_left, u_right, MOB), abs=1e-15
    )


# ----------------------------------------------------------- fields / source

def test_fields_vacuum():
    grid = nl.Grid(-2.5, 2.5, 10)
    state = nl.FVState(0.0, np.zeros(10), MOB.cap)
    kplus, kminus = nl.split_fields(grid, state, KER)
    assert np.all(kplus == 0.0)
    assert np.all(kminus == 0.0)
    assert np.all(nl.source_term(grid, state, KER, MOB) == 0.0)


def test_fields_single_charged_cell():
    grid = nl.Grid(-2.5, 2.5, 10)  # dx = 0.5, centers at -2.25 + 0.5 k
    vals = np.zeros(10)
    vals[2] = 0.8
    state = nl.FVState(0.0, vals, MOB.cap)
    kplus, kminus = nl.split_fields(grid, state, KER)
    xc = grid.centers
    for j in range(10):
        expect = KER.d1(xc[j] - xc[2]) * 0.8 * grid.dx
        if j >= 2:
            assert kplus[j] == pytest.approx(expect, abs=1e-16)
            assert kminus[j] == 0.0
        else:
            assert kminus[j] == pytest.approx(expect, abs=1e-16)
            assert kplus[j] == 0.0
    src = nl.source_term(grid, state, KER, MOB)
    assert src[2] == pytest.approx(0.8 * MOB(0.8) * KER.d2(0.0) * 0.8 * grid.dx, rel=1e-14)


def test_fields_signs_and_symmetry():
    grid = nl.Grid(-2.5, 2.5, 11)
    vals = np.array([0.0, 0.1, 0.5, 0.2, 0.7, 0.9, 0.7, 0.2, 0.5, 0.1, 0.0])
    state = nl.FVState(0.0, vals, MOB.cap)
    kplus, kminus = nl.split_fields(grid, state, KER)
    assert np.all(kplus >= 0.0)
    assert np.all(kminus <= 0.0)
    # even data: K+ at the center cancels K-, and dk is an even sequence
    assert kplus[5] == pytest.approx(-kminus[5], abs=1e-15)
    fields = compute_fields(vals, KernelTables.build(grid, KER))
    dk = fields[2]
    assert dk == pytest.approx(dk[::-1], abs=1e-15)


def test_fields_match_oracle_loops():
    grid = nl.Grid(-2.5, 2.5, 5)  # dx = 1 exactly, centers exact
    vals = np.array([0.2, 0.9, 0.4, 0.0, 0.6])
    state = nl.FVState(0.0, vals, MOB.cap)
    kplus, kminus = nl.split_fields(grid, state, KER)
    op, om, odk = oracle_fields(grid, vals, KER)
    assert kplus == pytest.approx(op, abs=1e-15)
    assert kminus == pytest.approx(om, abs=1e-15)
    fields = compute_fields(vals, KernelTables.build(grid, KER))
    assert fields[2] == pytest.approx(odk, abs=1e-15)


def test_source_zero_at_vacuum_and_cap():
    grid = nl.Grid(-2.5, 2.5, 8)
    vals = np.array([0.0, 1.0, 1.0, 0.0, 0.5, 1.0, 0.0, 0.0])
    state = nl.FVState(0.0, vals, MOB.cap)
    src = nl.source_term(grid, state, KER, MOB)
    dead = vals <= 0.0
    dead |= vals >= MOB.cap
    assert np.all(src[dead] == 0.0)


# --------------------------------------------------------------------- cfl

def test_cfl_vacuum_returns_cap():
    grid = nl.Grid(-1.0, 1.0, 10)
    zeros = np.zeros(10)
    dt = cfl_dt(grid, (zeros, zeros, zeros), zeros, MOB, 0.45, cap_dt=0.125)
    assert dt == 0.125


def test_cfl_halving_dx_halves_dt():
    vals = np.array([0.2, 0.9, 0.4, 0.0, 0.6])
    fields = compute_fields(vals, KernelTables.build(nl.Grid(-2.5, 2.5, 5), KER))
    coarse = cfl_dt(nl.Grid(-2.5, 2.5, 5), fields, vals, MOB, 0.45, cap_dt=np.inf)
    fine = cfl_dt(nl.Grid(-2.5, 2.5, 10), fields, vals, MOB, 0.45, cap_dt=np.inf)
    assert fine == pytest.approx(0.5 * coarse, rel=1e-15)


def test_cfl_transport_bound_uses_max_dflux():
    assert MOB.dflux_bound == 1.0  # |f'(0)| for f(u) = u(1-u)
    grid = nl.Grid(-2.5, 2.5, 5)
    vals = np.array([0.2, 0.9, 0.4, 0.0, 0.6])
    kplus, kminus, dk = compute_fields(vals, KernelTables.build(grid, KER))
    dt = cfl_dt(grid, (kplus, kminus, np.zeros_like(dk)), vals, MOB, 0.45, cap_dt=np.inf)
    assert dt == pytest.approx(0.45 * grid.dx / np.max(kplus + np.abs(kminus)), rel=1e-14)


# -------------------------------------------------------------------- steps

def test_step_matches_manual_oracle():
    grid = nl.Grid(-2.5, 2.5, 5)  # dx = 1: table offsets equal center offsets exactly
    vals = np.array([0.2, 0.9, 0.4, 0.0, 0.6])
    state = nl.FVState(0.0, vals, MOB.cap)
    dt = 0.01
    new, clamp = nl.gd_step(grid, state, KER, MOB, dt)
    want = oracle_step(grid, vals, KER, MOB, dt)
    scale = np.maximum(1.0, np.abs(want))
    assert np.max(np.abs(new.values - want) / scale) < 1e-14
    assert clamp == 0.0
    assert new.time == pytest.approx(dt)


def test_step_vacuum_stays_vacuum():
    grid = nl.Grid(-1.0, 1.0, 6)
    state = nl.FVState(0.0, np.zeros(6), MOB.cap)
    new, clamp = nl.gd_step(grid, state, KER, MOB, 0.05)
    assert np.array_equal(new.values, np.zeros(6))
    assert clamp == 0.0


def test_step_preserves_full_density_block_exactly():
    grid = nl.Grid(-2.5, 2.5, 1200)
    vals = np.where(np.abs(grid.centers) < 0.3, 1.0, 0.0)
    state = nl.FVState(0.0, vals, MOB.cap)
    fields = compute_fields(vals, KernelTables.build(grid, KER))
    dt = cfl_dt(grid, fields, vals, MOB, 0.45, cap_dt=1.0)
    new, clamp = nl.gd_step(grid, state, KER, MOB, dt, fields)
    assert np.array_equal(new.values, vals)
    assert clamp == 0.0


# ----------------------------------------------------------- cell averaging

def test_cell_averages_aligned_profile_is_verbatim():
    grid = nl.Grid(0.0, 1.0, 4)
    prof = nl.DensityProfile(np.array([0.25, 0.75]), np.array([0.8]))
    avg = nl.cell_averages(prof, grid)
    assert np.array_equal(avg, np.array([0.0, 0.8, 0.8, 0.0]))


def test_cell_averages_partial_overlap_exact():
    grid = nl.Grid(0.0, 1.0, 4)
    prof = nl.DensityProfile(np.array([0.1, 0.3]), np.array([1.0]))
    avg = nl.cell_averages(prof, grid)
    assert avg == pytest.approx([0.6, 0.2, 0.0, 0.0], abs=1e-15)
    assert np.sum(avg) * grid.dx == pytest.approx(prof.mass, abs=1e-15)


def test_cell_averages_rejects_profile_outside_grid():
    grid = nl.Grid(0.0, 1.0, 4)
    prof = nl.DensityProfile(np.array([-0.5, 0.5]), np.array([1.0]))
    with pytest.raises(ValueError):
        nl.cell_averages(prof, grid)


# --------------------------------------------------------------------- runs

def test_run_steady_block_final_equals_initial_bitwise():
    grid = nl.Grid(-2.5, 2.5, 240)
    edges = grid.edges  # block edges taken from the grid so sampling is verbatim
    prof = nl.DensityProfile(np.array([edges[106], edges[134]]), np.array([1.0]))
    run = nl.gd_run(grid, prof, KER, MOB, 0.5, output_times=[0.25, 0.5], cfl=0.45)
    assert np.array_equal(run.states[0].values, prof.value_at(grid.centers))
    assert np.array_equal(run.final.values, run.states[0].values)
    assert run.clamped_mass == 0.0


def test_run_time_axis_and_mass_bookkeeping():
    grid = nl.Grid(-2.5, 2.5, 300)
    prof = nl.uniform_profile(-1.0, 1.0, 0.3)
    run = nl.gd_run(grid, prof, KER, MOB, 0.2, output_times=[0.1, 0.2], cfl=0.45)
    assert run.times[0] == 0.0
    assert np.all(np.diff(run.times) > 0.0)
    assert run.times[-1] == 0.2
    assert len(run.masses) == len(run.states)
    assert run.clamped_mass == 0.0
    assert run.clamp_warnings == 0


def test_run_mass_drift_shrinks_linearly_with_refinement():
    # the center-weighted splitting is not exactly conservative; its drift
    # must vanish at first order in dx
    prof = nl.uniform_profile(-1.0, 1.0, 0.3)
    drift = {}
    for j_cells in (300, 600):
        grid = nl.Grid(-2.5, 2.5, j_cells)
        run = nl.gd_run(grid, prof, KER, MOB, 1.0, output_times=[1.0], cfl=0.45)
        drift[j_cells] = abs(run.masses[-1] - prof.mass)
    assert drift[300] / drift[600] > 1.5


def test_run_grid_refinement_contracts():
    prof = nl.uniform_profile(-1.0, 1.0, 0.3)
    finals = {}
    for j_cells in (300, 600, 1200, 2400):
        grid = nl.Grid(-2.5, 2.5, j_cells)
        run = nl.gd_run(grid, prof, KER, MOB, 1.0, output_times=[1.0], cfl=0.45)
        finals[j_cells] = run.profiles()[-1]
    diffs = {j: nl.l1_distance(finals[j], finals[2 * j]) for j in (300, 600, 1200)}
    assert diffs[300] / diffs[600] >= 1.3
    assert diffs[600] / diffs[1200] >= 1.3


def test_run_two_bumps_drift_toward_merged_step():
    prof = nl.build_profile(nl.builtin_scenario("two-step-11"))
    grid = nl.Grid(-2.5, 2.5, 600)
    run = nl.gd_run(grid, prof, KER, MOB, 1.0, output_times=np.linspace(0.0, 1.0, 11), cfl=0.45)
    profs = run.profiles()
    gap_mass = np.array([p.cdf(0.45) - p.cdf(0.05) for p in profs])
    assert np.all(np.diff(gap_mass) >= 0.0)
    assert gap_mass[-1] > 1e-3
    assert nl.l1_distance(profs[-1], profs[0]) > 0.05
