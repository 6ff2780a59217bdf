"""Frame-level calculus for left-invariant Hermitian structures.

A unitary (1,0)-frame e_1..e_n of the complexified Lie algebra carries
two structure-constant tensors,

    C^j_{ik} = <[e_i, e_k], ebar_j>,    D^j_{ik} = <[ebar_j, e_k], e_i>,

where <.,.> is the complex-bilinear extension of the metric, so
<e_i, ebar_j> = delta_ij and <e_i, e_j> = <ebar_i, ebar_j> = 0.  The
pairing convention is adopted here once and used everywhere.  C has no
(0,1) part by integrability, so integrability is built into the data
model; the real-side check lives in hermlie.realform.

Everything downstream is polynomial in (C, D):

    2 T^j_{ik}   = -D^j_{ik} + D^j_{ki} - C^j_{ik}        (Chern torsion)
    Gamma^j_{ik} = D^j_{ik} + s T^j_{ik}                  (connection family)
    Gamma^j_{i kbar} = -conj(Gamma^i_{jk})                (metric compatibility)

The family interpolates the Chern connection (s=0), the complexified
Levi-Civita projection (s=1) and the Bismut connection (s=2).

Complexified directions are indexed 0..2n-1: the first n are e_1..e_n,
the last n their conjugates.  Curvature of a left-invariant connection
is R(a,b) = A_a A_b - A_b A_a - A_{[a,b]} with constant endomorphisms
A; its vanishing at parameter s is what "flat" means throughout.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ._config import default_tol
from .exceptions import DimensionMismatchError
from .tensors import (
    antisymmetrize_lower,
    as_coefficient_tensor,
    frobenius,
    frozen,
    max_abs,
    transform_frame,
)

_FORMULA_GUARD = 1e-12  # dual-route agreement required inside gauduchon_connection


@dataclass(frozen=True)
class UnitaryStructure:
    """Structure constants (C, D) of a left-invariant Hermitian structure.

    C is antisymmetrized exactly in its lower indices at construction.
    Instances are immutable and safe to share across threads.
    """

    n: int
    C: np.ndarray
    D: np.ndarray

    def __post_init__(self):
        if self.n < 1:
            raise DimensionMismatchError(f"n must be positive, got {self.n}")
        C = as_coefficient_tensor(self.C, self.n, "C")
        D = as_coefficient_tensor(self.D, self.n, "D")
        object.__setattr__(self, "C", frozen(antisymmetrize_lower(C)))
        object.__setattr__(self, "D", frozen(D))


@dataclass(frozen=True)
class TorsionData:
    """Chern torsion T^j_{ik} (antisymmetric in i,k) and its trace eta_r = sum_k T^k_{kr}."""

    T: np.ndarray
    eta: np.ndarray

    @property
    def n(self) -> int:
        return self.T.shape[0]

    @property
    def norm(self) -> float:
        return frobenius(self.T)

    @property
    def eta_norm(self) -> float:
        return frobenius(self.eta)


@dataclass(frozen=True)
class ConnectionFamily:
    """Connection coefficients at parameter s.

    gamma[j,i,k] = <nabla^s_{e_k} e_i, ebar_j>, gamma_bar[j,i,k] the
    conjugate-direction companion; gamma_bar^j_{ik} = -conj(gamma^i_{jk})
    exactly (metric compatibility in a unitary frame).
    """

    s: float
    gamma: np.ndarray
    gamma_bar: np.ndarray


@dataclass(frozen=True)
class CurvatureReport:
    """Curvature blocks of the parameter-s connection.

    blocks maps an ordered direction pair (a, b) -- each of ("e", i) or
    ("ebar", i) with 1-based i -- to the n x n matrix of R(a,b)
    restricted to the (1,0) frame (rows = output index).  max_abs is
    the flatness residual: the largest entry modulus over all blocks.
    """

    s: float
    blocks: dict
    max_abs: float

    @property
    def frobenius(self) -> float:
        """Frame-change invariant size of the whole curvature tensor."""
        return float(np.sqrt(sum(np.sum(np.abs(B) ** 2) for B in self.blocks.values())))


@dataclass(frozen=True)
class ResidualReport:
    """Residuals of an identity family, keyed by index tuple.

    When the producing operation was given a tolerance it is recorded
    here and ``valid`` reports the max_abs <= tol judgment.
    """

    name: str
    max_abs: float
    per_identity: dict
    tol: float | None = None

    @property
    def valid(self) -> bool | None:
        return None if self.tol is None else self.max_abs <= self.tol

    def passed(self, tol: float) -> bool:
        return self.max_abs <= tol


@dataclass(frozen=True)
class BracketTables:
    """Full complexified bracket coefficients.

    table[a, b, c] is the coefficient of direction c in [dir_a, dir_b],
    with directions 0..n-1 = e_1..e_n and n..2n-1 = ebar_1..ebar_n:

        [e_i, e_k]       = sum_j C^j_{ik} e_j
        [ebar_j, e_i]    = sum_k ( D^j_{ki} ebar_k - conj(D^i_{kj}) e_k )
        [ebar_j, ebar_k] = conj of [e_j, e_k]

    Conjugation equivariance holds by construction.
    """

    n: int
    table: np.ndarray

    def holomorphic(self) -> np.ndarray:
        """Coefficients of [e_i, e_k] on the e-frame: hol[i,k,j] = C^j_{ik}."""
        return self.table[: self.n, : self.n, : self.n]

    def mixed(self) -> np.ndarray:
        """Coefficients of [ebar_j, e_i] on all 2n directions."""
        return self.table[self.n :, : self.n, :]


@dataclass(frozen=True)
class RepresentationReport:
    """Induced matrices in the unitary algebra and their defect.

    p_holo[k] is the matrix attached to e_k (entry [i, j] = -gamma^j_{ik},
    i.e. minus the connection matrix of the frame written in row
    convention), p_conj[k] the one attached to ebar_k.  On a flat
    structure the assignment is a Lie algebra homomorphism into u(n);
    homomorphism_residual measures max |p([a,b]) - [p(a), p(b)]| over
    all frame pairs and skew_residual measures max |p(X) + p(X)^H| over
    the realified directions e_k + ebar_k and i(e_k - ebar_k).
    """

    s: float
    p_holo: np.ndarray
    p_conj: np.ndarray
    homomorphism_residual: float
    skew_residual: float


@dataclass(frozen=True)
class LeviCivitaReport:
    """Levi-Civita data on the complexified frame.

    endo[a] is the 2n x 2n matrix of nabla_{dir_a}; gamma_ops/beta_ops
    are the torsion-built pieces of the splitting nabla = chern + gamma
    + beta; decomposition_residual is the max deviation from that
    splitting and curvature_residual the max entry of the Riemannian
    curvature of nabla (commutator construction).
    """

    endo: np.ndarray
    gamma_ops: np.ndarray
    beta_ops: np.ndarray
    decomposition_residual: float
    curvature_residual: float


@dataclass(frozen=True)
class FlatnessSummary:
    """Gauge-invariant scalars driving the flat-or-not experiments.

    flatness residuals are Frobenius norms of the curvature tensor
    (frame-change invariant); kahler means torsion_norm <= tol.
    """

    torsion_norm: float
    eta_norm: float
    rows: tuple  # of (s, flatness_residual)
    kahler: bool


def chern_torsion(U: UnitaryStructure) -> TorsionData:
    """Chern torsion T^j_{ik} = (-D^j_{ik} + D^j_{ki} - C^j_{ik}) / 2 and its trace."""
    T = 0.5 * (-U.D + U.D.transpose(0, 2, 1) - U.C)
    eta = np.einsum("kkr->r", T)
    return TorsionData(T=frozen(T), eta=frozen(eta))


def gauduchon_connection(U: UnitaryStructure, s: float) -> ConnectionFamily:
    """Connection coefficients gamma = D + s*T and their conjugate companion.

    The coefficients are also assembled along the independent route
    gamma = (1-s/2) D^j_{ik} + (s/2) D^j_{ki} - (s/2) C^j_{ik} (and the
    matching expansion for gamma_bar); the two must agree to machine
    precision or an AssertionError flags an implementation fault.
    """
    T = chern_torsion(U).T
    gamma = U.D + s * T
    gamma_bar = -np.conj(gamma.transpose(1, 0, 2))

    direct = (1 - s / 2) * U.D + (s / 2) * U.D.transpose(0, 2, 1) - (s / 2) * U.C
    cD = np.conj(U.D)
    cC = np.conj(U.C)
    direct_bar = (
        -(1 - s / 2) * cD.transpose(1, 0, 2)
        - (s / 2) * cD.transpose(2, 0, 1)
        + (s / 2) * cC.transpose(1, 0, 2)
    )
    scale = 1.0 + max_abs(gamma)
    drift = max(max_abs(gamma - direct), max_abs(gamma_bar - direct_bar))
    assert drift <= _FORMULA_GUARD * scale, (
        f"connection routes disagree by {drift:.3e}"
    )
    return ConnectionFamily(s=float(s), gamma=frozen(gamma), gamma_bar=frozen(gamma_bar))


def bracket_tables(U: UnitaryStructure) -> BracketTables:
    """Complexified bracket coefficients on the 2n frame directions."""
    n = U.n
    table = np.zeros((2 * n, 2 * n, 2 * n), dtype=complex)
    # [e_i, e_k] = C^j_{ik} e_j
    table[:n, :n, :n] = np.einsum("jik->ikj", U.C)
    # [ebar_j, e_i] = D^j_{ki} ebar_k - conj(D^i_{kj}) e_k
    table[n:, :n, n:] = np.einsum("jki->jik", U.D)
    table[n:, :n, :n] = -np.einsum("ikj->jik", np.conj(U.D))
    table[:n, n:, :] = -table[n:, :n, :].transpose(1, 0, 2)
    # [ebar_j, ebar_k] = conj(C^i_{jk}) ebar_i
    table[n:, n:, n:] = np.einsum("ijk->jki", np.conj(U.C))
    return BracketTables(n=n, table=frozen(table))


def connection_endomorphisms(U: UnitaryStructure, s: float) -> np.ndarray:
    """The 2n constant endomorphisms A_a of the complexified algebra.

    A[a][out, in] acts on coordinates ordered (e_1..e_n, ebar_1..ebar_n);
    the (0,1) blocks are the conjugates of the (1,0) blocks of the
    conjugate direction, so each A_a is metric compatible by construction.
    """
    n = U.n
    conn = gauduchon_connection(U, s)
    A = np.zeros((2 * n, 2 * n, 2 * n), dtype=complex)
    for k in range(n):
        A[k, :n, :n] = conn.gamma[:, :, k]
        A[k, n:, n:] = np.conj(conn.gamma_bar[:, :, k])
        A[n + k, :n, :n] = conn.gamma_bar[:, :, k]
        A[n + k, n:, n:] = np.conj(conn.gamma[:, :, k])
    return A


def _direction_label(n: int, a: int):
    return ("e", a + 1) if a < n else ("ebar", a - n + 1)


def _curvature_tensor(A: np.ndarray, brk: np.ndarray) -> np.ndarray:
    """R[a,b] = A_a A_b - A_b A_a - A_{[a,b]} for every ordered pair."""
    prod = np.einsum("axy,byz->abxz", A, A, optimize=True)
    comm = prod - prod.transpose(1, 0, 2, 3)
    lin = np.einsum("abc,cxy->abxy", brk, A, optimize=True)
    return comm - lin


def curvature(U: UnitaryStructure, s: float) -> CurvatureReport:
    """Curvature blocks of the parameter-s connection; max_abs = flatness residual."""
    n = U.n
    A = connection_endomorphisms(U, s)
    brk = bracket_tables(U).table
    R = _curvature_tensor(A, brk)
    blocks = {}
    for a in range(2 * n):
        for b in range(2 * n):
            blocks[(_direction_label(n, a), _direction_label(n, b))] = frozen(
                R[a, b, :n, :n]
            )
    return CurvatureReport(s=float(s), blocks=blocks, max_abs=max_abs(R[:, :, :n, :n]))


def connection_flatness_residuals(U: UnitaryStructure, s: float):
    """The two identity families satisfied by flat left-invariant connections.

    holomorphic family:
        sum_r ( C^r_{ik} G^l_{jr} + G^r_{ji} G^l_{rk} - G^r_{jk} G^l_{ri} )
    mixed family:
        sum_r ( D^j_{ri} conj(G^k_{lr}) + G^l_{kr} conj(D^i_{rj})
                + G^l_{ri} conj(G^k_{rj}) - G^r_{ki} conj(G^r_{lj}) )

    with G the parameter-s coefficients.  Under the fixed index
    identification (asserted forever in the test suite)

        holomorphic[i,j,k,l] = -R(e_i, e_k)[l, j]
        mixed[i,j,k,l]       = -R(e_i, ebar_j)[l, k]

    these are exactly curvature entries, so both vanish iff the
    structure is flat at s.
    """
    G = gauduchon_connection(U, s).gamma
    cG = np.conj(G)
    cD = np.conj(U.D)
    holo = (
        np.einsum("rik,ljr->ijkl", U.C, G, optimize=True)
        + np.einsum("rji,lrk->ijkl", G, G, optimize=True)
        - np.einsum("rjk,lri->ijkl", G, G, optimize=True)
    )
    mixed = (
        np.einsum("jri,klr->ijkl", U.D, cG, optimize=True)
        + np.einsum("lkr,irj->ijkl", G, cD, optimize=True)
        + np.einsum("lri,krj->ijkl", G, cG, optimize=True)
        - np.einsum("rki,rlj->ijkl", G, cG, optimize=True)
    )
    return (
        _tensor_report("flat-connection-holomorphic", holo),
        _tensor_report("flat-connection-mixed", mixed),
    )


def _tensor_report(name: str, res: np.ndarray, prefix=()) -> ResidualReport:
    per = {}
    it = np.nditer(res, flags=["multi_index"])
    for value in it:
        per[prefix + tuple(i + 1 for i in it.multi_index)] = complex(value)
    return ResidualReport(name=name, max_abs=max_abs(res), per_identity=per)


def validate_structure(U: UnitaryStructure, tol: float | None = None) -> ResidualReport:
    """Evaluate the three Jacobi identity families for all index tuples.

    family 1:  sum_r ( C^r_{ij} C^l_{rk} + C^r_{jk} C^l_{ri} + C^r_{ki} C^l_{rj} )
    family 2:  sum_r ( C^r_{ik} D^l_{jr} + D^r_{ji} D^l_{rk} - D^r_{jk} D^l_{ri} )
    family 3:  sum_r ( C^r_{ik} conj(D^r_{jl}) - C^j_{rk} conj(D^i_{rl})
                       + C^j_{ri} conj(D^k_{rl}) - D^l_{ri} conj(D^k_{jr})
                       + D^l_{rk} conj(D^i_{jr}) )

    The structure is declared valid iff max_abs <= tol (default: the
    package validity tolerance).  No separate integrability check
    exists here: C carries no (0,1) part by construction.
    """
    res = jacobi_residual_tensors(U.C, U.D)
    per = {}
    worst = 0.0
    for fam, arr in zip(("ccc", "cdd", "cdbar"), res):
        rep = _tensor_report(fam, arr, prefix=(fam,))
        per.update(rep.per_identity)
        worst = max(worst, rep.max_abs)
    if tol is None:
        tol = default_tol()
    return ResidualReport(name="jacobi", max_abs=worst, per_identity=per, tol=tol)


def jacobi_residual_tensors(C: np.ndarray, D: np.ndarray):
    """The three Jacobi residual arrays, indexed [i,j,k,l] (0-based)."""
    cD = np.conj(D)
    fam1 = (
        np.einsum("rij,lrk->ijkl", C, C, optimize=True)
        + np.einsum("rjk,lri->ijkl", C, C, optimize=True)
        + np.einsum("rki,lrj->ijkl", C, C, optimize=True)
    )
    fam2 = (
        np.einsum("rik,ljr->ijkl", C, D, optimize=True)
        + np.einsum("rji,lrk->ijkl", D, D, optimize=True)
        - np.einsum("rjk,lri->ijkl", D, D, optimize=True)
    )
    fam3 = (
        np.einsum("rik,rjl->ijkl", C, cD, optimize=True)
        - np.einsum("jrk,irl->ijkl", C, cD, optimize=True)
        + np.einsum("jri,krl->ijkl", C, cD, optimize=True)
        - np.einsum("lri,kjr->ijkl", D, cD, optimize=True)
        + np.einsum("lrk,ijr->ijkl", D, cD, optimize=True)
    )
    return fam1, fam2, fam3


def is_valid(U: UnitaryStructure, tol: float | None = None) -> bool:
    return bool(validate_structure(U, tol).valid)


def unitary_representation(U: UnitaryStructure, s: float) -> RepresentationReport:
    """Matrices of the frame monodromy map and their homomorphism defect.

    p(e_k)[i, j] = -gamma^j_{ik} and p(ebar_k)[i, j] = -gamma_bar^j_{ik}
    (row convention: the frame column transforms by the matrix acting
    on the right).  On any structure p(X) is skew-Hermitian for real X;
    on flat structures p is additionally a Lie algebra homomorphism,
    and its defect equals the transposed curvature blocks entrywise.
    """
    n = U.n
    conn = gauduchon_connection(U, s)
    p = np.zeros((2 * n, n, n), dtype=complex)
    for k in range(n):
        p[k] = -conn.gamma[:, :, k].T
        p[n + k] = -conn.gamma_bar[:, :, k].T
    brk = bracket_tables(U).table

    hom = 0.0
    for a in range(2 * n):
        for b in range(2 * n):
            lhs = np.einsum("c,cxy->xy", brk[a, b], p)
            rhs = p[a] @ p[b] - p[b] @ p[a]
            hom = max(hom, max_abs(lhs - rhs))

    skew = 0.0
    for k in range(n):
        real_dir = p[k] + p[n + k]
        imag_dir = 1j * (p[k] - p[n + k])
        skew = max(skew, max_abs(real_dir + real_dir.conj().T))
        skew = max(skew, max_abs(imag_dir + imag_dir.conj().T))

    return RepresentationReport(
        s=float(s),
        p_holo=frozen(p[:n]),
        p_conj=frozen(p[n:]),
        homomorphism_residual=hom,
        skew_residual=skew,
    )


def covariant_torsion_derivatives(U: UnitaryStructure, s: float):
    """Covariant derivatives of the torsion along the parameter-s connection.

    Td[j,i,k,l]    = T^j_{ik,l}    = sum_r ( -T^j_{rk} G^r_{il} - T^j_{ir} G^r_{kl}
                                             + T^r_{ik} G^j_{rl} )
    Tdbar[j,i,k,l] = T^j_{ik,lbar} = sum_r (  T^j_{rk} conj(G^i_{rl})
                                             + T^j_{ir} conj(G^k_{rl})
                                             - T^r_{ik} conj(G^r_{jl}) )
    """
    T = chern_torsion(U).T
    G = gauduchon_connection(U, s).gamma
    cG = np.conj(G)
    Td = (
        -np.einsum("jrk,ril->jikl", T, G, optimize=True)
        - np.einsum("jir,rkl->jikl", T, G, optimize=True)
        + np.einsum("rik,jrl->jikl", T, G, optimize=True)
    )
    Tdbar = (
        np.einsum("jrk,irl->jikl", T, cG, optimize=True)
        + np.einsum("jir,krl->jikl", T, cG, optimize=True)
        - np.einsum("rik,rjl->jikl", T, cG, optimize=True)
    )
    return frozen(Td), frozen(Tdbar)


def levi_civita(U: UnitaryStructure) -> LeviCivitaReport:
    """Levi-Civita connection on the complexified frame.

    For left-invariant fields the scalar products are constant, so the
    torsion-free metric connection reduces to

        2 <nabla_a b, c> = <[a,b], c> - <[a,c], b> - <[b,c], a>.

    The report verifies the splitting nabla = chern + gamma + beta with

        gamma(e_k) e_i = T^j_{ik} e_j,   gamma(ebar_k) e_i = -conj(T^i_{jk}) e_j,
        beta(ebar_k) e_i = T^k_{ij} ebar_j,   beta(e_k) e_i = 0,

    extended to the conjugate frame by conjugation, and returns the
    Riemannian curvature residual of nabla via the same commutator
    construction used for the Hermitian connection family.
    """
    n = U.n
    brk = bracket_tables(U).table
    # bilinear pairing in (e, ebar) coordinates
    P = np.zeros((2 * n, 2 * n))
    P[:n, n:] = np.eye(n)
    P[n:, :n] = np.eye(n)

    pair = np.einsum("abd,dc->abc", brk, P, optimize=True)
    # K[a,b,c] = <[a,b],c> - <[a,c],b> - <[b,c],a>
    K = pair - pair.transpose(0, 2, 1) - pair.transpose(2, 0, 1)
    # coefficients: nabla_a dir_b = sum_c coeff[a,b,c] dir_c with P the Gram matrix
    coeff = 0.5 * np.einsum("abc,cd->abd", K, P, optimize=True)
    endo = coeff.transpose(0, 2, 1)  # endo[a][out, in]

    T = chern_torsion(U).T
    gamma_ops = np.zeros_like(endo)
    beta_ops = np.zeros_like(endo)
    for k in range(n):
        g_h = T[:, :, k]  # gamma(e_k) e_i = T^j_{ik} e_j
        g_c = -np.conj(T).transpose(1, 0, 2)[:, :, k]  # gamma(ebar_k) e_i
        gamma_ops[k, :n, :n] = g_h
        gamma_ops[k, n:, n:] = np.conj(g_c)
        gamma_ops[n + k, :n, :n] = g_c
        gamma_ops[n + k, n:, n:] = np.conj(g_h)
        b_c = T[k, :, :].T  # beta(ebar_k) e_i = T^k_{ij} ebar_j -> [j, i]
        beta_ops[n + k, n:, :n] = b_c
        beta_ops[k, :n, n:] = np.conj(b_c)

    chern = connection_endomorphisms(U, 0.0)
    decomposition = max_abs(endo - (chern + gamma_ops + beta_ops))
    R = _curvature_tensor(endo, brk)
    return LeviCivitaReport(
        endo=frozen(endo),
        gamma_ops=frozen(gamma_ops),
        beta_ops=frozen(beta_ops),
        decomposition_residual=decomposition,
        curvature_residual=max_abs(R),
    )


def kahler_flatness_summary(
    U: UnitaryStructure, s_grid, tol: float | None = None
) -> FlatnessSummary:
    """Torsion size, trace size and flatness residual over an s grid.

    All reported scalars are invariant under constant unitary frame
    changes; the flatness residual is the Frobenius norm of the full
    curvature tensor.  Kahler iff the torsion norm is at or below tol.
    """
    if tol is None:
        tol = default_tol()
    tor = chern_torsion(U)
    rows = tuple((float(s), curvature(U, s).frobenius) for s in s_grid)
    return FlatnessSummary(
        torsion_norm=tor.norm,
        eta_norm=tor.eta_norm,
        rows=rows,
        kahler=tor.norm <= tol,
    )


def unitary_change(U: UnitaryStructure, V: np.ndarray) -> UnitaryStructure:
    """The same structure written in the frame e'_a = sum_i V[i,a] e_i (V unitary)."""
    V = np.asarray(V, dtype=complex)
    if V.shape != (U.n, U.n):
        raise DimensionMismatchError(f"V must be {U.n}x{U.n}, got {V.shape}")
    return UnitaryStructure(
        n=U.n, C=transform_frame(U.C, V), D=transform_frame(U.D, V)
    )
