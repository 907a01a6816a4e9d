import numpy as np
import pytest
from hypothesis import HealthCheck, settings

settings.register_profile(
    "default",
    deadline=None,
    max_examples=25,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("default")


# ---------------------------------------------------------------------------
# Independent oracles.  These deliberately avoid the package's own code
# paths: the spin-half construction works in the full 2^N space and the
# matrix exponential uses scaled Taylor series plus squaring.
# ---------------------------------------------------------------------------

SX = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex)
SY = np.array([[0.0, -1.0j], [1.0j, 0.0]], dtype=complex)
SZ = np.array([[1.0, 0.0], [0.0, -1.0]], dtype=complex)
ID2 = np.eye(2, dtype=complex)


def _site_operator(op, site, n):
    out = np.array([[1.0 + 0j]])
    for k in range(n):
        out = np.kron(out, op if k == site else ID2)
    return out


def full_chain_hamiltonian(n, j=1.0, delta=None, fields=None):
    """2^N x 2^N Hamiltonian from explicit Pauli tensor products."""
    delta = np.zeros(n - 1) if delta is None else np.asarray(delta, dtype=float)
    fields = np.zeros(n) if fields is None else np.asarray(fields, dtype=float)
    dim = 2 ** n
    h = np.zeros((dim, dim), dtype=complex)
    for k in range(n):
        h += fields[k] * _site_operator(SZ, k, n)
    for k in range(n - 1):
        jk = j * np.sqrt((k + 1) * (n - k - 1)) * (1.0 + delta[k])
        h += jk * (_site_operator(SX, k, n) @ _site_operator(SX, k + 1, n)
                   + _site_operator(SY, k, n) @ _site_operator(SY, k + 1, n))
    return h


def single_excitation_block(n, j=1.0, delta=None, fields=None, drop_shift=True):
    """Project the full Hamiltonian onto the one-flipped-spin basis.

    Basis state j (0-based) has spin j in |1>, index 2^(n-1-j) in the
    computational ordering.  With drop_shift the mean of the diagonal is
    removed, matching the convention that a constant energy offset is a
    global phase.
    """
    full = full_chain_hamiltonian(n, j, delta, fields)
    idx = [2 ** (n - 1 - site) for site in range(n)]
    block = full[np.ix_(idx, idx)].real.copy()
    if drop_shift:
        block -= np.eye(n) * np.trace(block) / n
    return block


def expm_taylor(a):
    """Matrix exponential by scaling, Taylor summation and squaring."""
    a = np.asarray(a, dtype=complex)
    norm = np.linalg.norm(a, np.inf)
    squarings = max(0, int(np.ceil(np.log2(max(norm, 1e-300)))) + 1)
    b = a / (2 ** squarings)
    term = np.eye(a.shape[0], dtype=complex)
    out = term.copy()
    for k in range(1, 40):
        term = term @ b / k
        out += term
        if np.linalg.norm(term, np.inf) < 1e-20:
            break
    for _ in range(squarings):
        out = out @ out
    return out


def sector_matrix(n, j=1.0, delta=None, fields=None):
    """Dense one-excitation Hamiltonian assembled directly (not via the
    package): hopping 2 J sqrt(k(N-k)) (1+delta_k), on-site -2 b_j."""
    delta = np.zeros(n - 1) if delta is None else np.asarray(delta, dtype=float)
    fields = np.zeros(n) if fields is None else np.asarray(fields, dtype=float)
    k = np.arange(1, n)
    off = 2.0 * j * np.sqrt(k * (n - k)) * (1.0 + delta)
    return np.diag(-2.0 * fields) + np.diag(off, 1) + np.diag(off, -1)


def oracle_amplitudes(n, t, j=1.0, delta=None, fields=None):
    """f(t) by Taylor/squaring expm of the dense sector matrix.

    Independent of the spectral propagator; matrix assembly itself is
    cross-checked against the Pauli-projection construction at small N.
    """
    u = expm_taylor(-1j * t * sector_matrix(n, j, delta, fields))
    return u[:, 0]


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)
