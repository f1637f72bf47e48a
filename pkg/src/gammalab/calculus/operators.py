"""Sectorial matrices, resolvents, certificates and operator generators."""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field

import numpy as np

COND_LIMIT = 1e12
RESOLVENT_CAP = 1e10


class ResolventError(ValueError):
    """z is (numerically) in the spectrum."""

    def __init__(self, msg, condition):
        super().__init__(msg)
        self.condition = condition


class NotSectorialError(ValueError):
    """The sampled resolvent bound diverged at the requested angle."""


def _as_matrix(A):
    if isinstance(A, SectorialOperator):
        return A.effective
    M = np.asarray(A, dtype=complex)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise ValueError("operator must be a square matrix")
    return M


def resolvent(A, z):
    """(z - A)^{-1} by a direct solve; rejects ill-conditioned shifts."""
    M = _as_matrix(A)
    B = z * np.eye(M.shape[0]) - M
    cond = np.linalg.cond(B)
    if not np.isfinite(cond) or cond > COND_LIMIT:
        raise ResolventError(f"z={z} is too close to the spectrum (cond {cond:.3g})", cond)
    return np.linalg.solve(B, np.eye(M.shape[0], dtype=complex))


def spectral_angle(lam, tol=0.0):
    """max |arg lambda| over eigenvalues away from zero."""
    lam = np.asarray(lam)
    big = lam[np.abs(lam) > tol]
    return float(np.max(np.abs(np.angle(big)))) if big.size else 0.0


@dataclass(frozen=True)
class Certificate:
    angle: float      # spectral angle estimate
    constant: float   # sampled sup of ||z (z - A)^{-1}||
    sigma: float      # angle outside of which the sup was taken


def sectoriality_certificate(A, sigma=None, ray_samples=64, angles=8, cap=RESOLVENT_CAP) -> Certificate:
    """Sampled sup of ||z (z - A)^{-1}|| over rays with |arg z| in [sigma, pi]."""
    M = _as_matrix(A)
    n = M.shape[0]
    lam = np.linalg.eigvals(M)
    mods = np.abs(lam)
    scale = max(float(mods.max()), 1e-300)
    omega = spectral_angle(lam, 1e-12 * scale)
    if sigma is None:
        sigma = 0.5 * (omega + math.pi)
    if not 0 < sigma < math.pi + 1e-15:
        raise ValueError("sigma must lie in (0, pi)")
    if omega >= sigma:
        raise NotSectorialError(f"spectrum reaches angle {omega:.4f} >= {sigma:.4f}")
    nz = mods[mods > 1e-12 * scale]
    lo = math.log10(nz.min()) - 4 if nz.size else -4.0
    hi = math.log10(scale) + 4
    r = np.logspace(lo, hi, ray_samples)
    th = np.linspace(sigma, math.pi, angles)
    th = np.concatenate([th, -th[:-1]])
    Z = (r[:, None] * np.exp(1j * th[None, :])).ravel()
    B = Z[:, None, None] * np.eye(n) - M[None, :, :]
    with np.errstate(all="ignore"):
        s = np.linalg.svd(B, compute_uv=False)
    smin = s[:, -1]
    vals = np.where(smin > 0, np.abs(Z) / np.where(smin > 0, smin, 1.0), np.inf)
    Mconst = float(np.max(vals))
    if not np.isfinite(Mconst) or Mconst > cap:
        raise NotSectorialError(f"resolvent bound {Mconst:.3g} exceeds cap at angle {sigma:.4f}")
    return Certificate(omega, Mconst, float(sigma))


@dataclass(frozen=True, eq=False)
class SectorialOperator:
    """A square matrix with its sectoriality certificate.

    ``shift`` is 1.0 when a singular input was replaced by A + 1 for the
    calculus; ``effective`` is the matrix actually used.
    """

    matrix: np.ndarray
    certificate: Certificate
    shift: float = 0.0
    eig: tuple | None = field(default=None, repr=False)
    name: str = ""

    @classmethod
    def certify(cls, A, sigma=None, shift="auto", name="", ray_samples=64):
        M = np.array(A, dtype=complex)
        if M.ndim != 2 or M.shape[0] != M.shape[1]:
            raise ValueError("operator must be a square matrix")
        if shift == "auto":
            sv = np.linalg.svd(M, compute_uv=False)
            shift = 1.0 if sv[-1] <= 1e-12 * max(sv[0], 1e-300) else 0.0
        shift = float(shift)
        E = M + shift * np.eye(M.shape[0])
        cert = sectoriality_certificate(E, sigma, ray_samples)
        lam, V = np.linalg.eig(E)
        eig = None
        if np.linalg.cond(V) < 1e8:
            eig = (V, lam, np.linalg.inv(V))
        M.setflags(write=False)
        return cls(M, cert, shift, eig, name)

    @property
    def n(self):
        return self.matrix.shape[0]

    @property
    def effective(self):
        if self.shift == 0.0:
            return self.matrix
        return self.matrix + self.shift * np.eye(self.n)

    @property
    def angle(self):
        return self.certificate.angle

    @property
    def constant(self):
        return self.certificate.constant

    def eigenvalues(self):
        if self.eig is not None:
            return self.eig[1]
        return np.linalg.eigvals(self.effective)

    def spectral_bounds(self):
        """(smallest nonzero modulus, largest modulus) of the spectrum."""
        m = np.abs(self.eigenvalues())
        top = float(m.max())
        nz = m[m > 1e-12 * top]
        return float(nz.min()), top

    def inverse_norm(self):
        sv = np.linalg.svd(self.effective, compute_uv=False)
        return math.inf if sv[-1] == 0 else 1.0 / float(sv[-1])

    def resolvent(self, z):
        return resolvent(self.effective, z)

    def kron(self, m):
        """A tensor I_m acting on coordinate blocks."""
        return SectorialOperator.certify(np.kron(self.matrix, np.eye(m)), shift=self.shift,
                                         name=f"{self.name}(x)I{m}")


def as_operator(A) -> SectorialOperator:
    return A if isinstance(A, SectorialOperator) else SectorialOperator.certify(A)


# generators
def laplacian1d(n):
    """Dirichlet Laplacian on n interior points of (0, 1)."""
    return (n + 1) ** 2 * (2 * np.eye(n) - np.eye(n, k=1) - np.eye(n, k=-1))


def cycle_laplacian(n):
    """Graph Laplacian of the n-cycle (kernel = constants)."""
    P = np.roll(np.eye(n), 1, axis=1)
    return 2 * np.eye(n) - P - P.T


def diag_operator(values):
    return np.diag(np.asarray(values, dtype=complex))


def load_operator_csv(path):
    """Dense complex matrix stored as re_0, im_0, re_1, im_1, ... per row."""
    with open(path, newline="") as fh:
        rows = [r for r in csv.reader(fh) if r and not r[0].startswith("#")]
    try:
        data = np.array([[float(v) for v in r] for r in rows])
    except ValueError:
        data = np.array([[float(v) for v in r] for r in rows[1:]])
    if data.ndim != 2 or data.shape[1] % 2 or data.shape[1] // 2 != data.shape[0]:
        raise ValueError("operator CSV must hold n rows of 2n re/im columns")
    return data[:, 0::2] + 1j * data[:, 1::2]


def save_operator_csv(A, path):
    A = np.asarray(A, dtype=complex)
    out = np.empty((A.shape[0], 2 * A.shape[1]))
    out[:, 0::2] = A.real
    out[:, 1::2] = A.imag
    np.savetxt(path, out, delimiter=",", fmt="%.17g")


def parse_operator(text):
    """Matrix from 'laplacian1d:32', 'laplacian1d(32)', 'cycle-laplacian:16',
    'diag:1,2,5' or 'csv:path'."""
    text = text.strip()
    if text.startswith("csv:"):
        return load_operator_csv(text[4:])
    if "(" in text and text.endswith(")"):
        head, arg = text[:-1].split("(", 1)
    elif ":" in text:
        head, arg = text.split(":", 1)
    else:
        raise ValueError(f"cannot parse operator {text!r}")
    head = head.strip().lower()
    if head == "laplacian1d":
        return laplacian1d(int(arg))
    if head in ("cycle-laplacian", "cycle_laplacian"):
        return cycle_laplacian(int(arg))
    if head == "diag":
        return diag_operator([complex(v) for v in arg.replace(";", ",").split(",") if v.strip()])
    raise ValueError(f"unknown operator generator {head!r}")
