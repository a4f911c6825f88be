"""Construction of the relaxed max-min harvesting SDP.

Decision quantities are the per-user beam covariances W_k, the artificial
noise covariance V, and the hypograph scalar tau.  The eavesdropping-capacity
cap on each (harvester, user) pair is enforced through the linear matrix
inequality  G^H W_k G <= alpha * (G^H V G + sigma^2 I)  with
alpha = 2^rate - 1, encoded as a PSD slack block coupled by equalities.

The same row generator also serves the baseline schemes, where W_k or V are
restricted to scalar multiples of fixed shapes or to a subspace: a MatrixVar
maps each n_tx x n_tx Hermitian quantity onto one or more PSD blocks.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .channel import ChannelRealization, ScenarioParams
from .errors import DimError, InvalidConfig
from .linalg import hermitian_part, trace_inner


def alpha_of(cap_limit: float) -> float:
    """Auxiliary LMI constant 2^rate - 1 for a capacity cap in bit/s/Hz."""
    if cap_limit <= 0:
        raise InvalidConfig(f"capacity limit must be positive, got {cap_limit}")
    return float(2.0 ** cap_limit - 1.0)


def alpha_table(params: ScenarioParams) -> np.ndarray:
    """(n_eh, n_info) table of LMI constants."""
    return np.array([[alpha_of(r) for r in row] for row in params.cap_limit])


def hermitian_basis(n: int) -> list[np.ndarray]:
    """Orthonormal basis of the n x n Hermitian space under Re Tr(A B)."""
    basis = []
    for i in range(n):
        e = np.zeros((n, n), dtype=complex)
        e[i, i] = 1.0
        basis.append(e)
    s = 1.0 / np.sqrt(2.0)
    for i in range(n):
        for j in range(i + 1, n):
            e = np.zeros((n, n), dtype=complex)
            e[i, j] = s
            e[j, i] = s
            basis.append(e)
            e = np.zeros((n, n), dtype=complex)
            e[i, j] = 1j * s
            e[j, i] = -1j * s
            basis.append(e)
    return basis


@dataclass(frozen=True)
class BlockSpec:
    label: str
    dim: int  # complex Hermitian dimension


@dataclass(frozen=True)
class MatrixVar:
    """Hermitian-valued decision quantity expressed over PSD blocks.

    components: tuple of (block_index, mode, data) where mode is
      "full"   -- the block itself is the value (data ignored),
      "sub"    -- value += basis @ X @ basis^H with data = basis (n_tx, d),
      "scaled" -- value += x * data with the block one-dimensional.
    offset: fixed Hermitian part added to the value (affine variables).
    """

    components: tuple
    offset: np.ndarray | None = None

    def coeff_terms(self, c: np.ndarray):
        """Blockwise coefficients representing <c, value> on this variable."""
        out = []
        for block, mode, data in self.components:
            if mode == "full":
                out.append((block, c))
            elif mode == "sub":
                out.append((block, hermitian_part(data.conj().T @ c @ data)))
            else:
                out.append((block, np.array([[trace_inner(c, data)]], dtype=complex)))
        return out

    def offset_inner(self, c: np.ndarray) -> float:
        if self.offset is None:
            return 0.0
        return trace_inner(c, self.offset)

    def recover(self, block_values: dict) -> np.ndarray:
        """Assemble the n_tx x n_tx value from solved block values."""
        val = None
        for block, mode, data in self.components:
            x = block_values[block]
            if mode == "full":
                part = x
            elif mode == "sub":
                part = data @ x @ data.conj().T
            else:
                part = float(np.real(x[0, 0])) * data
            val = part if val is None else val + part
        if self.offset is not None:
            val = self.offset if val is None else val + self.offset
        return hermitian_part(val)


@dataclass(frozen=True)
class Row:
    label: str
    sense: str       # 'eq' | 'ge' | 'le'
    rhs: float
    tau_coeff: float
    terms: tuple     # ((block_index, Hermitian coefficient), ...)


@dataclass
class SdpProblem:
    """Block-structured conic program: maximize tau subject to the rows."""

    blocks: tuple[BlockSpec, ...]
    rows: tuple[Row, ...]
    w_vars: tuple[MatrixVar, ...]
    v_var: MatrixVar
    n_tx: int
    n_rx: int
    kind: str = "optimal"
    s_block_index: dict = field(default_factory=dict)   # (j, k) -> block index
    lmi_groups: tuple = ()                              # ((j, k, row_start, n_rows), ...)

    @property
    def n_info(self) -> int:
        return len(self.w_vars)

    def row_count(self, prefix: str) -> int:
        return sum(1 for r in self.rows if r.label.startswith(prefix))

    def validate(self) -> None:
        nb = len(self.blocks)
        for row in self.rows:
            for block, coeff in row.terms:
                if not 0 <= block < nb:
                    raise DimError(f"row {row.label} references undeclared block {block}")
                d = self.blocks[block].dim
                if coeff.shape != (d, d):
                    raise DimError(f"row {row.label}: coefficient shape {coeff.shape} "
                                   f"does not match block dim {d}")
                if np.abs(coeff - coeff.conj().T).max(initial=0.0) > 1e-10 * (1 + np.abs(coeff).max(initial=0.0)):
                    raise DimError(f"row {row.label}: coefficient not Hermitian")


def _accumulate(terms: dict, items) -> None:
    for block, coeff in items:
        if block in terms:
            terms[block] = terms[block] + coeff
        else:
            terms[block] = np.array(coeff, dtype=complex)


def build_structured_sdp(channels: ChannelRealization, params: ScenarioParams,
                         w_vars, v_var, blocks, kind: str) -> SdpProblem:
    """Emit rows C1, C2bar, C3, C7 for arbitrary variable structures."""
    k_n, j_n = params.n_info, params.n_eh
    sig2 = params.noise_power
    alpha = alpha_table(params)
    h = channels.h
    g = channels.g
    rows: list[Row] = []

    def add_row(label, sense, rhs, tau_coeff, pieces):
        terms: dict = {}
        off = 0.0
        for var, c in pieces:
            _accumulate(terms, var.coeff_terms(c))
            off += var.offset_inner(c)
        rows.append(Row(label=label, sense=sense, rhs=rhs - off, tau_coeff=tau_coeff,
                        terms=tuple(sorted(terms.items()))))

    # C1: Tr(H_k W_k)/gamma_k - Tr(H_k (sum_{m != k} W_m + V)) >= sigma^2
    for k in range(k_n):
        h_k = np.outer(h[k], h[k].conj())
        pieces = [(w_vars[k], h_k / params.sinr_req[k])]
        for m in range(k_n):
            if m != k:
                pieces.append((w_vars[m], -h_k))
        pieces.append((v_var, -h_k))
        add_row(f"C1[{k}]", "ge", sig2, 0.0, pieces)

    # C2bar: slack S_{j,k} = alpha_{j,k} (G_j^H V G_j + sigma^2 I) - G_j^H W_k G_j >= 0,
    # pinned entrywise against an orthonormal Hermitian basis.
    basis = hermitian_basis(params.n_rx)
    s_index: dict = {}
    lmi_groups = []
    s_var_cache: dict = {}
    for j in range(j_n):
        for k in range(k_n):
            bidx = len(blocks)
            blocks.append(BlockSpec(label=f"S[{j},{k}]", dim=params.n_rx))
            s_index[(j, k)] = bidx
            s_var_cache[(j, k)] = MatrixVar(components=((bidx, "full", None),))
            row_start = len(rows)
            a = alpha[j, k]
            for idx, e in enumerate(basis):
                gegh = hermitian_part(g[j] @ e @ g[j].conj().T)
                rhs = a * sig2 * float(np.real(np.trace(e)))
                pieces = [(s_var_cache[(j, k)], e),
                          (w_vars[k], gegh),
                          (v_var, -a * gegh)]
                add_row(f"C2bar[{j},{k}]:{idx}", "eq", rhs, 0.0, pieces)
            lmi_groups.append((j, k, row_start, len(basis)))

    # C3: Tr(V + sum_k W_k) <= p_max
    eye = np.eye(params.n_tx, dtype=complex)
    pieces = [(w_vars[k], eye) for k in range(k_n)] + [(v_var, eye)]
    add_row("C3", "le", params.p_max, 0.0, pieces)

    # C7: eta_j Tr(G_j^H (sum_k W_k + V) G_j) >= tau
    for j in range(j_n):
        gg = hermitian_part(g[j] @ g[j].conj().T) * params.efficiency[j]
        pieces = [(w_vars[k], gg) for k in range(k_n)] + [(v_var, gg)]
        add_row(f"C7[{j}]", "ge", 0.0, -1.0, pieces)

    prob = SdpProblem(blocks=tuple(blocks), rows=tuple(rows),
                      w_vars=tuple(w_vars), v_var=v_var,
                      n_tx=params.n_tx, n_rx=params.n_rx, kind=kind,
                      s_block_index=s_index, lmi_groups=tuple(lmi_groups))
    prob.validate()
    return prob


def build_sdp(channels: ChannelRealization, params: ScenarioParams) -> SdpProblem:
    """The relaxed problem with full Hermitian W_k and V (rank constraint dropped)."""
    if channels.h.shape != (params.n_info, params.n_tx):
        raise DimError("channel realization does not match scenario dimensions")
    if channels.g.shape != (params.n_eh, params.n_tx, params.n_rx):
        raise DimError("channel realization does not match scenario dimensions")
    blocks = [BlockSpec(label=f"W[{k}]", dim=params.n_tx) for k in range(params.n_info)]
    blocks.append(BlockSpec(label="V", dim=params.n_tx))
    w_vars = [MatrixVar(components=((k, "full", None),)) for k in range(params.n_info)]
    v_var = MatrixVar(components=((params.n_info, "full", None),))
    return build_structured_sdp(channels, params, w_vars, v_var, blocks, kind="optimal")


# ---------------------------------------------------------------------------
# Plain-text dump of a built problem, for cross-checks with external solvers.
#
# Format (one token-separated record per line, '#' starts a comment):
#   problem swiptalloc-sdp 1
#   block <index> <label> <dim>
#   row <index> <label> <sense> <rhs> <tau_coeff>
#   coef <row> <block> <r> <c> <re> <im>     # upper triangle (r <= c) only
#   end
# The objective is always: maximize tau.
# ---------------------------------------------------------------------------

def dump_problem(problem: SdpProblem, stream) -> None:
    close = False
    if isinstance(stream, str):
        stream = open(stream, "w")
        close = True
    try:
        stream.write("problem swiptalloc-sdp 1\n")
        for i, b in enumerate(problem.blocks):
            stream.write(f"block {i} {b.label} {b.dim}\n")
        for ri, row in enumerate(problem.rows):
            stream.write(f"row {ri} {row.label} {row.sense} {row.rhs!r} {row.tau_coeff!r}\n")
            for block, coeff in row.terms:
                d = coeff.shape[0]
                for r in range(d):
                    for c in range(r, d):
                        v = coeff[r, c]
                        if v != 0:
                            stream.write(f"coef {ri} {block} {r} {c} {v.real!r} {v.imag!r}\n")
        stream.write("end\n")
    finally:
        if close:
            stream.close()


def load_problem_dump(stream):
    """Parse a dump back into (blocks, rows) with dense Hermitian coefficients.

    Returns (blocks, rows) where blocks is a list of (label, dim) and rows a
    list of dicts {label, sense, rhs, tau_coeff, terms: {block: matrix}}.
    """
    close = False
    if isinstance(stream, str):
        stream = open(stream)
        close = True
    try:
        blocks: list = []
        rows: list = []
        for line in stream:
            parts = line.split("#", 1)[0].split()
            if not parts:
                continue
            tag = parts[0]
            if tag == "problem":
                if parts[1:] != ["swiptalloc-sdp", "1"]:
                    raise InvalidConfig(f"unknown dump header: {line!r}")
            elif tag == "block":
                blocks.append((parts[2], int(parts[3])))
            elif tag == "row":
                rows.append({"label": parts[2], "sense": parts[3],
                             "rhs": float(parts[4]), "tau_coeff": float(parts[5]),
                             "terms": {}})
            elif tag == "coef":
                ri, bi, r, c = int(parts[1]), int(parts[2]), int(parts[3]), int(parts[4])
                v = float(parts[5]) + 1j * float(parts[6])
                terms = rows[ri]["terms"]
                if bi not in terms:
                    terms[bi] = np.zeros((blocks[bi][1], blocks[bi][1]), dtype=complex)
                terms[bi][r, c] += v
                if r != c:
                    terms[bi][c, r] += np.conj(v)
            elif tag == "end":
                break
            else:
                raise InvalidConfig(f"unknown dump record: {line!r}")
        return blocks, rows
    finally:
        if close:
            stream.close()
