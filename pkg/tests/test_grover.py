import math

import numpy as np
import pytest

from kplexq import kernels
from kplexq.grover import (
    AmplitudeVector,
    RNG_ID,
    apply_phase_oracle,
    basis_to_mask,
    diffusion,
    grover_iterations,
    grover_run,
    mask_table_to_basis,
    mask_to_basis,
    optimal_iterations,
    sample,
    schedule,
    snapshot_record,
    success_probability,
    uniform_state,
)


def closed_form(n, M, j):
    N = 1 << n
    theta = math.asin(math.sqrt(M / N))
    return math.sin((2 * j + 1) * theta) / math.sqrt(M), math.cos((2 * j + 1) * theta) / math.sqrt(N - M)


def test_uniform_state():
    assert np.allclose(uniform_state(1).amps, [2**-0.5, 2**-0.5])
    assert np.allclose(uniform_state(6).probabilities(), 1 / 64)
    for n in range(1, 13):
        assert abs(uniform_state(n).norm() - 1) < 1e-12
    with pytest.raises(ValueError):
        uniform_state(25)


def test_phase_oracle():
    s = uniform_state(3)
    f = apply_phase_oracle(s, lambda b: b == 5)
    want = np.full(8, 8**-0.5)
    want[5] *= -1
    assert np.allclose(f.amps, want)
    assert np.allclose(apply_phase_oracle(s, lambda b: False).amps, s.amps)
    assert np.allclose(apply_phase_oracle(f, lambda b: b == 5).amps, s.amps)


def test_diffusion():
    s = uniform_state(3)
    assert np.allclose(diffusion(s).amps, s.amps)
    d = diffusion(apply_phase_oracle(s, lambda b: b == 5))
    sol, other = closed_form(3, 1, 1)
    assert abs(d.amps[5] - sol) < 1e-12 and abs(d.amps[0] - other) < 1e-12
    assert abs(d.amps[5].real - 0.8839) < 1e-4 and abs(d.amps[0].real - 0.1768) < 1e-4
    rng = np.random.default_rng(0)
    a = AmplitudeVector(4, rng.normal(size=16) + 1j * rng.normal(size=16))
    a.amps /= a.norm()
    assert np.allclose(diffusion(diffusion(a)).amps, a.amps, atol=1e-12)
    assert abs(diffusion(a).norm() - 1) < 1e-12


def test_optimal_iterations():
    assert optimal_iterations(6, 1) == 6
    assert optimal_iterations(3, 1) == 2
    assert optimal_iterations(4, 16) == 0
    assert optimal_iterations(4, 0) == 0
    with pytest.raises(ValueError):
        optimal_iterations(3, 9)


@pytest.mark.parametrize("n", range(3, 11))
@pytest.mark.parametrize("M", [1, 2, 4])
def test_closed_form_amplitudes(n, M):
    rng = np.random.default_rng(n * 10 + M)
    N = 1 << n
    marked = np.zeros(N, bool)
    marked[rng.choice(N, M, replace=False)] = True
    I = optimal_iterations(n, M)
    _, snaps = grover_iterations(uniform_state(n), marked, 2 * I, keep_snapshots=True)
    for snap in snaps:
        sol, other = closed_form(n, M, snap.iteration)
        assert np.abs(snap.amps[marked] - sol).max() < 1e-9
        assert np.abs(snap.amps[~marked] - other).max() < 1e-9
        assert abs(np.sqrt(snap.probs.sum()) - 1) < 1e-12
    final = AmplitudeVector(n, snaps[I].amps)
    p = success_probability(final, marked)
    if M / N <= 1 / 8:
        assert p >= 1 - M / N
    if I >= 1:
        assert 1 - p <= math.pi**2 / (4 * I) ** 2


def test_success_probability():
    s = uniform_state(6)
    assert abs(success_probability(s, [7]) - 1 / 64) < 1e-15
    assert success_probability(s, []) == 0.0


def test_run_g6_like():
    marked = np.zeros(64, bool)
    marked[mask_to_basis(0b11011, 6)] = True
    run = grover_run(6, marked, 1, 20000, seed=1)
    assert run.schedule.iterations == 6
    theta = math.asin(1 / 8)
    assert abs(success_probability(run.final, marked) - math.sin(13 * theta) ** 2) < 1e-12
    assert run.success_frequency >= 0.99
    assert run.ranked_outcomes()[0] == mask_to_basis(0b11011, 6) == 54


def test_run_n3_one_iteration_and_all_marked():
    marked = np.zeros(8, bool)
    marked[5] = True
    _, snaps = grover_iterations(uniform_state(3), marked, 1, keep_snapshots=True)
    assert abs(snaps[1].probs[5] - 25 / 32) < 1e-12
    run = grover_run(3, np.ones(8, bool), 8, 16000, seed=2)
    assert run.schedule.iterations == 0 and run.success_frequency == 1.0
    freqs = np.array([run.histogram.get(b, 0) for b in range(8)]) / 16000
    assert np.abs(freqs - 1 / 8).max() < 0.02


def test_histogram_matches_probabilities():
    marked = np.zeros(32, bool)
    marked[[3, 17]] = True
    run = grover_run(5, marked, 2, 20000, seed=3)
    probs = run.final.probabilities()
    freqs = np.array([run.histogram.get(b, 0) for b in range(32)]) / 20000
    assert np.abs(freqs - probs).max() < 0.02


def test_sampling_reproducible():
    p = uniform_state(4).probabilities()
    assert (sample(p, 100, 9) == sample(p, 100, 9)).all()
    assert not (sample(p, 100, 9) == sample(p, 100, 10)).all()


def test_run_argument_checks():
    with pytest.raises(ValueError):
        grover_run(3, np.zeros(8, bool), 0, 10, 0)
    with pytest.raises(ValueError):
        grover_run(3, np.ones(8, bool), 8, 0, 0)


def test_basis_convention():
    assert mask_to_basis(0b1001, 6) == 36  # {v1, v4} -> |100100>
    assert basis_to_mask(36, 6) == 0b1001
    table = np.zeros(64, bool)
    table[0b1001] = True
    assert np.nonzero(mask_table_to_basis(table, 6))[0].tolist() == [36]


def test_snapshot_record_keys():
    run = grover_run(3, lambda b: b == 1, 1, 50, seed=0)
    rec = snapshot_record(run, 2, 1)
    assert set(rec) == {"n", "k", "T", "M", "iterations", "snapshots", "histogram",
                        "success_frequency", "seed", "rng_id"}
    assert rec["rng_id"] == RNG_ID and len(rec["snapshots"]) == run.schedule.iterations + 1
    assert all(abs(sum(s["probs"]) - 1) < 1e-9 for s in rec["snapshots"])


def test_grover_step_backends_agree():
    rng = np.random.default_rng(4)
    amps = (rng.normal(size=256) + 1j * rng.normal(size=256)).astype(np.complex128)
    marked = rng.random(256) < 0.1
    a, b = amps.copy(), amps.copy()
    kernels.BACKENDS["numba"]["grover_step"](a, marked)
    kernels.BACKENDS["numpy"]["grover_step"](b, marked)
    assert np.allclose(a, b, atol=1e-13)
    assert schedule(6, 1).N == 64
