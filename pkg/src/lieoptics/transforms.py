"""Linear-optical mode transformations.

Unitaries are plain ``numpy`` complex arrays of shape ``(m, m)``. Mode
indices are 1-based wherever they cross the public API.

Mesh cell convention: a cell on adjacent modes ``(j, j+1)`` with internal
phase ``theta`` and external phase ``phi`` is the Mach-Zehnder interferometer

    B @ diag(exp(i theta), 1) @ B @ diag(exp(i phi), 1),   B = [[1, i], [i, 1]] / sqrt(2)

    = i exp(i theta/2) [[exp(i phi) sin(theta/2),  cos(theta/2)],
                        [exp(i phi) cos(theta/2), -sin(theta/2)]]

so ``theta = pi/2`` is a balanced splitter, ``theta = 0`` a full cross and
``theta = pi`` the bar state. A mesh applies its cells in list order and then
the output phase screen ``diag(exp(i output_phases))``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DimensionError, ModeIndexError, ShapeError, UnitarityError

UNITARY_TOL = 1e-10


def unitarity_deviation(U):
    U = np.asarray(U)
    return float(np.max(np.abs(U.conj().T @ U - np.eye(U.shape[0]))))


def check_unitary(U, tol=UNITARY_TOL):
    """Return ``U`` as a complex array, raising if it is not square and unitary."""
    U = np.asarray(U, dtype=complex)
    if U.ndim != 2 or U.shape[0] != U.shape[1]:
        raise ShapeError(f"expected a square matrix, got shape {U.shape}")
    if U.shape[0] < 1:
        raise DimensionError("unitary must have at least one mode")
    dev = unitarity_deviation(U)
    if dev > tol:
        raise UnitarityError(dev, tol)
    return U


def haar_random_unitary(m, seed):
    """Sample an ``m x m`` unitary from the Haar measure.

    Complex Ginibre matrix followed by QR, with the phases of ``diag(R)``
    pushed back into ``Q`` so the result is Haar rather than QR-biased.
    """
    if m < 1:
        raise DimensionError(f"mode count must be >= 1, got {m}")
    rng = np.random.default_rng(seed)
    z = (rng.standard_normal((m, m)) + 1j * rng.standard_normal((m, m))) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    d = np.diag(r)
    return q * (d / np.abs(d))


def two_mode_embed(m, j, k, core):
    """Embed a 2x2 unitary acting on modes ``j < k`` (1-based) into ``m`` modes."""
    if not (1 <= j < k <= m):
        raise ModeIndexError(f"need 1 <= j < k <= m, got j={j}, k={k}, m={m}")
    core = check_unitary(core)
    if core.shape != (2, 2):
        raise ShapeError(f"core must be 2x2, got {core.shape}")
    U = np.eye(m, dtype=complex)
    idx = [j - 1, k - 1]
    U[np.ix_(idx, idx)] = core
    return U


_S2 = 1 / np.sqrt(2)
_CORES = {
    "X": np.array([[1, 1], [1, -1]], dtype=complex) * _S2,
    "Y": np.array([[1j, 1], [1j, -1]], dtype=complex) * _S2,
}


def measurement_core(kind):
    """Balanced two-mode transform used to read out the X or Y observables."""
    try:
        return _CORES[kind.upper()].copy()
    except KeyError:
        raise ValueError(f"kind must be 'X' or 'Y', got {kind!r}") from None


def mzi_cell(theta, phi):
    s, c = np.sin(theta / 2), np.cos(theta / 2)
    e = np.exp(1j * phi)
    return 1j * np.exp(1j * theta / 2) * np.array([[e * s, c], [e * c, -s]])


@dataclass(frozen=True)
class MeshCell:
    layer: int
    mode: int  # acts on (mode, mode + 1), 1-based
    theta: float
    phi: float

    @property
    def modes(self):
        return (self.mode, self.mode + 1)


@dataclass
class MeshSettings:
    dim: int
    cells: list[MeshCell] = field(default_factory=list)
    output_phases: np.ndarray | None = None

    def __post_init__(self):
        if self.dim < 1:
            raise DimensionError(f"mesh dimension must be >= 1, got {self.dim}")
        if self.output_phases is None:
            self.output_phases = np.zeros(self.dim)
        self.output_phases = np.asarray(self.output_phases, dtype=float)
        if self.output_phases.shape != (self.dim,):
            raise ShapeError("output_phases must have one entry per mode")
        for cell in self.cells:
            if not 1 <= cell.mode < self.dim:
                raise ModeIndexError(f"cell on modes {cell.modes} outside {self.dim} modes")


def mesh_compose(settings):
    m = settings.dim
    U = np.eye(m, dtype=complex)
    for cell in settings.cells:
        j = cell.mode - 1
        U[[j, j + 1], :] = mzi_cell(cell.theta, cell.phi) @ U[[j, j + 1], :]
    return np.exp(1j * settings.output_phases)[:, None] * U


def _null_right(x, y):
    # cell T with [x, y] @ T^dag = [0, *]
    theta = 2 * np.arctan2(abs(y), abs(x))
    phi = float(np.angle(-x / y)) if abs(x) > 0 and abs(y) > 0 else 0.0
    return theta, phi


def _null_left(x, y):
    # cell T with T @ [x, y]^T = [*, 0]
    theta = 2 * np.arctan2(abs(x), abs(y))
    phi = float(np.angle(y / x)) if abs(x) > 0 and abs(y) > 0 else 0.0
    return theta, phi


def _factor_phase_cell(W):
    """Write a 2x2 unitary as diag(a, b) @ mzi_cell(theta, phi)."""
    theta = 2 * np.arctan2(abs(W[0, 0]), abs(W[0, 1]))
    s, c = np.sin(theta / 2), np.cos(theta / 2)
    phi = float(np.angle(W[0, 0]) - np.angle(W[0, 1])) if s > 1e-12 and c > 1e-12 else 0.0
    T = mzi_cell(theta, phi)
    a = W[0, 1] / T[0, 1] if abs(T[0, 1]) >= abs(T[0, 0]) else W[0, 0] / T[0, 0]
    b = W[1, 1] / T[1, 1] if abs(T[1, 1]) >= abs(T[1, 0]) else W[1, 0] / T[1, 0]
    return a, b, theta, phi


def _assign_layers(raw, m):
    depth = [0] * (m + 1)
    cells = []
    for j, theta, phi in raw:
        layer = max(depth[j], depth[j + 1]) + 1
        depth[j] = depth[j + 1] = layer
        cells.append(MeshCell(layer, j, float(theta), float(phi)))
    return cells


def clements_decompose(U, tol=UNITARY_TOL):
    """Decompose a unitary into a rectangular mesh of m(m-1)/2 MZI cells.

    Alternating right/left nulling of the lower triangle, then the left-hand
    cells are commuted through the residual diagonal so everything ends up as
    cells followed by one output phase screen.
    """
    U = check_unitary(U, tol)
    m = U.shape[0]
    W = U.copy()
    right, left = [], []
    for i in range(m - 1):
        if i % 2 == 0:
            for j in range(i + 1):
                row, col = m - 1 - j, i - j
                theta, phi = _null_right(W[row, col], W[row, col + 1])
                T = mzi_cell(theta, phi)
                W[:, [col, col + 1]] = W[:, [col, col + 1]] @ T.conj().T
                right.append((col + 1, theta, phi))
        else:
            for j in range(1, i + 2):
                row, col = m + j - i - 2, j - 1
                theta, phi = _null_left(W[row - 1, col], W[row, col])
                T = mzi_cell(theta, phi)
                W[[row - 1, row], :] = T @ W[[row - 1, row], :]
                left.append((row, theta, phi))

    # U = L_1^dag ... L_k^dag D R_n ... R_1; move each L^dag through D.
    D = np.diag(W).copy()
    moved = []
    for mode, theta, phi in reversed(left):
        j = mode - 1
        blk = mzi_cell(theta, phi).conj().T @ np.diag(D[[j, j + 1]])
        a, b, th2, ph2 = _factor_phase_cell(blk)
        D[j], D[j + 1] = a, b
        moved.append((mode, th2, ph2))
    # application order: R_1 .. R_n, then L'_k .. L'_1
    raw = right + moved
    return MeshSettings(m, _assign_layers(raw, m), np.angle(D))


def _gray_ryser(A):
    n = A.shape[0]
    rows = [list(map(complex, r)) for r in A]
    cols = [[rows[i][j] for i in range(n)] for j in range(n)]
    sums = [0j] * n
    chosen = [False] * n
    total = 0j
    sign = -1 if n % 2 else 1
    gray = 0
    for step in range(1, 1 << n):
        new = step ^ (step >> 1)
        j = (gray ^ new).bit_length() - 1
        gray = new
        col = cols[j]
        if chosen[j]:
            for i in range(n):
                sums[i] -= col[i]
        else:
            for i in range(n):
                sums[i] += col[i]
        chosen[j] = not chosen[j]
        prod = 1 + 0j
        for v in sums:
            prod *= v
        sign = -sign
        total += sign * prod
    return total


def permanent(A):
    """Matrix permanent by Ryser's formula, Gray-code ordered (O(2^k k))."""
    A = np.asarray(A, dtype=complex)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ShapeError(f"permanent needs a square matrix, got shape {A.shape}")
    n = A.shape[0]
    if n == 0:
        return 1 + 0j
    if n == 1:
        return complex(A[0, 0])
    if n == 2:
        return complex(A[0, 0] * A[1, 1] + A[0, 1] * A[1, 0])
    return _gray_ryser(A)



def directional_coupler(reflectivity):
    r, t = np.sqrt(reflectivity), np.sqrt(1 - reflectivity)
    return np.array([[r, 1j * t], [1j * t, r]])


def mzi_device(theta, reflectivity=0.5):
    """MZI built from two identical couplers around an internal phase on the first arm."""
    C = directional_coupler(reflectivity)
    return C @ np.diag([np.exp(1j * theta), 1]) @ C


def realized_core(kind, reflectivity=0.5):
    """Measurement core as built from an MZI with imperfect couplers.

    Equals ``measurement_core(kind)`` at reflectivity 1/2; the Y core adds the
    pi/2 external phase on the first input.
    """
    T = np.exp(-0.75j * np.pi) * mzi_device(np.pi / 2, reflectivity)
    if kind.upper() == "Y":
        T = T @ np.diag([1j, 1])
    elif kind.upper() != "X":
        raise ValueError(f"kind must be 'X' or 'Y', got {kind!r}")
    return T


def realized_swap(reflectivity=0.5):
    """MZI in the cross state with its global phase removed; exact swap at R = 1/2."""
    return -1j * mzi_device(0.0, reflectivity)
