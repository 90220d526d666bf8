"""Monte Carlo experiment runner: BER and complexity sweeps, validation.

Reproducibility contract: every (sweep point, batch) pair derives its own
counter-based random stream from the master seed, batches run in a fixed
order within a point, and workers only parallelize across points, so a
given configuration and seed produce identical results for any worker
count.  The wall-time column is the single nondeterministic field in the
CSV output.

CSV schema (one row per sweep point, exactly these columns):

    scheme,d,m,snr_db,trials,bit_errors,ber,avg_real_mults,wall_ms

``avg_real_mults`` is per decoded vector symbol for the uncoded schemes
(a joint codeword decode covers D vector symbols) and per acquired bit
metric for the coded schemes.
"""

import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from . import _kernels, baselines, bicmb, modulation, numerics, pstbc
from .errors import InvalidInputError, UnsupportedError

CANONICAL_SCHEMES = ("pc", "pcmb", "fpmb", "uncoded-mb", "bicmb-pc", "bicmb-fp")
_ALIASES = {"gc": "pc", "gcmb": "pcmb", "bicmb-gc": "bicmb-pc"}
_SCHEME_ID = {s: i for i, s in enumerate(CANONICAL_SCHEMES)}
CODED_SCHEMES = ("bicmb-pc", "bicmb-fp")

DEFAULT_TARGET_ERRORS = 200
DEFAULT_MAX_TRIALS = 1_000_000
UNCODED_BATCH = 2048
CODED_BATCH = 32


def canonical_scheme(name):
    s = name.strip().lower()
    s = _ALIASES.get(s, s)
    if s not in CANONICAL_SCHEMES:
        raise UnsupportedError(f"unknown scheme {name!r}; pick one of "
                               f"{CANONICAL_SCHEMES} (gc/gcmb/bicmb-gc are aliases)")
    return s


@dataclass(frozen=True)
class SimConfig:
    scheme: str
    d: int = 2
    m: int = 4
    snr_db: tuple = (10.0,)
    target_errors: int = DEFAULT_TARGET_ERRORS
    max_trials: int = DEFAULT_MAX_TRIALS
    seed: int = 1
    rate: str = "2/3"
    precoder_path: str = None
    out_path: str = None
    workers: int = 1
    frame_codewords: int = None

    def validated(self):
        scheme = canonical_scheme(self.scheme)
        if self.d not in (2, 4):
            raise UnsupportedError(f"dimension {self.d} not supported (2 or 4)")
        if self.m not in modulation.SUPPORTED_SIZES:
            raise UnsupportedError(f"modulation {self.m} not supported")
        if scheme == "pc" and self.m not in baselines.PC_FEASIBLE[self.d]:
            raise UnsupportedError(
                f"pc with d={self.d}, M={self.m}: joint search beyond desk "
                f"scale (feasible: {baselines.PC_FEASIBLE[self.d]})")
        if scheme in CODED_SCHEMES:
            bicmb.conv_code(self.rate)  # raises if unsupported
        if self.target_errors < 1 or self.max_trials < 1:
            raise InvalidInputError("error target and trial cap must be >= 1")
        return replace(self, scheme=scheme)


@dataclass
class SweepRecord:
    scheme: str
    d: int
    m: int
    snr_db: float
    trials: int
    bit_errors: int
    ber: float
    avg_real_mults: float
    wall_ms: int


CSV_HEADER = "scheme,d,m,snr_db,trials,bit_errors,ber,avg_real_mults,wall_ms"


def record_to_csv_row(r: SweepRecord) -> str:
    return (f"{r.scheme},{r.d},{r.m},{r.snr_db:g},{r.trials},{r.bit_errors},"
            f"{r.ber:.8e},{r.avg_real_mults:.4f},{r.wall_ms}")


def write_csv(path, records):
    with open(path, "w", newline="") as f:
        f.write(CSV_HEADER + "\n")
        for r in records:
            f.write(record_to_csv_row(r) + "\n")


# ---------------------------------------------------------------------------
# per-point simulation
# ---------------------------------------------------------------------------


def _point_rng(seed, scheme, d, m, snr_idx, batch_idx):
    key = (seed, _SCHEME_ID[scheme], d, m, snr_idx, batch_idx)
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(key)))


def _tables(m):
    c = modulation.square_qam(m)
    pop = np.array([bin(x).count("1") for x in range(m)], dtype=np.int64)
    return c, pop


def _run_uncoded_point(cfg: SimConfig, snr_idx, stop_on_errors):
    scheme, d, m = cfg.scheme, cfg.d, cfg.m
    snr_db = cfg.snr_db[snr_idx]
    n0 = d / (10.0 ** (snr_db / 10.0))
    c, pop = _tables(m)
    code = pstbc.generation_matrix(d)
    if scheme == "fpmb":
        theta = (baselines.load_precoder(cfg.precoder_path).theta
                 if cfg.precoder_path else baselines.default_precoder(d).theta)
    bits_per_trial = d * d * c.nbits if scheme in ("pc", "pcmb") else d * c.nbits
    mult_units_per_trial = d if scheme in ("pc", "pcmb") else 1

    trials = errors = 0
    mults = leaves = visited = 0
    batch_idx = 0
    t0 = time.perf_counter()
    while trials < cfg.max_trials and (not stop_on_errors or errors < cfg.target_errors):
        b = min(UNCODED_BATCH, cfg.max_trials - trials)
        rng = _point_rng(cfg.seed, scheme, d, m, snr_idx, batch_idx)
        hs = (rng.standard_normal((b, d, d)) + 1j * rng.standard_normal((b, d, d))) / np.sqrt(2)
        if scheme in ("pc", "pcmb"):
            syms = rng.integers(0, m, size=(b, d, d)).astype(np.int64)
            noise = (rng.standard_normal((b, d, d)) + 1j * rng.standard_normal((b, d, d))) / np.sqrt(2)
            if scheme == "pcmb":
                be, mm, lv, vs = _kernels.pcmb_trials(
                    hs, syms, noise, n0, code.g_matrix, c.points, c.levels,
                    c.code_of_pos, c.nax, pop)
            else:
                be, mm, lv, vs = _kernels.pc_trials(
                    hs, syms, noise, n0, code.g_matrix, c.points, c.levels,
                    c.code_of_pos, c.nax, pop)
        else:
            syms = rng.integers(0, m, size=(b, d)).astype(np.int64)
            noise = (rng.standard_normal((b, d)) + 1j * rng.standard_normal((b, d))) / np.sqrt(2)
            if scheme == "fpmb":
                be, mm, lv, vs = _kernels.fpmb_trials(
                    hs, syms, noise, n0, theta, c.points, c.levels,
                    c.code_of_pos, c.nax, pop)
            else:
                be, mm, lv, vs = _kernels.mb_trials(
                    hs, syms, noise, n0, c.points, c.levels, c.code_of_pos,
                    c.nax, pop)
        trials += b
        errors += int(be)
        mults += int(mm)
        leaves += int(lv)
        visited += int(vs)
        batch_idx += 1
    wall_ms = int(round((time.perf_counter() - t0) * 1000))
    numerics.add_real_mults(mults)
    ber = errors / (trials * bits_per_trial)
    avg = mults / (trials * mult_units_per_trial)
    return SweepRecord(scheme=scheme, d=d, m=m, snr_db=snr_db, trials=trials,
                       bit_errors=errors, ber=ber, avg_real_mults=avg,
                       wall_ms=wall_ms)


def _run_coded_point(cfg: SimConfig, snr_idx, stop_on_errors):
    scheme, d, m = cfg.scheme, cfg.d, cfg.m
    snr_db = cfg.snr_db[snr_idx]
    n0 = d / (10.0 ** (snr_db / 10.0))
    c, _pop = _tables(m)
    conv = bicmb.conv_code(cfg.rate)
    n_cw, n_info = bicmb.frame_geometry(d, m, conv, cfg.frame_codewords)
    cap = n_cw * d * d * c.nbits
    kept = bicmb.kept_positions(conv, n_info + bicmb.TAIL_BITS)
    next_state, out_bits = bicmb.trellis_tables()
    code = pstbc.generation_matrix(d)
    if scheme == "bicmb-fp":
        theta = (baselines.load_precoder(cfg.precoder_path).theta
                 if cfg.precoder_path else baselines.default_precoder(d).theta)
        lab_subs = modulation.label_subsets(c)
        n_use = n_cw * d
    else:
        subs = modulation.axis_level_subsets(c)

    frames = errors = 0
    metric_mults = n_metrics = 0
    batch_idx = 0
    t0 = time.perf_counter()
    while frames < cfg.max_trials and (not stop_on_errors or errors < cfg.target_errors):
        fb = min(CODED_BATCH, cfg.max_trials - frames)
        rng = _point_rng(cfg.seed, scheme, d, m, snr_idx, batch_idx)
        infos = rng.integers(0, 2, size=(fb, n_info)).astype(np.int64)
        perms = np.empty((fb, cap), dtype=np.int64)
        for f in range(fb):
            perms[f] = rng.permutation(cap)
        hs = (rng.standard_normal((fb, d, d)) + 1j * rng.standard_normal((fb, d, d))) / np.sqrt(2)
        if scheme == "bicmb-pc":
            noise = (rng.standard_normal((fb, n_cw, d, d))
                     + 1j * rng.standard_normal((fb, n_cw, d, d))) / np.sqrt(2)
            be, mm, nm, _ = _kernels.bicmb_pc_frames(
                infos, perms, hs, noise, n0, code.g_matrix, next_state,
                out_bits, kept, c.points, c.levels, c.code_of_pos, c.nax, subs)
        else:
            noise = (rng.standard_normal((fb, n_use, d))
                     + 1j * rng.standard_normal((fb, n_use, d))) / np.sqrt(2)
            be, mm, nm, _ = _kernels.bicmb_fp_frames(
                infos, perms, hs, noise, n0, theta, next_state, out_bits,
                kept, c.points, c.levels, c.code_of_pos, c.nax, lab_subs)
        frames += fb
        errors += int(be)
        metric_mults += int(mm)
        n_metrics += int(nm)
        batch_idx += 1
    wall_ms = int(round((time.perf_counter() - t0) * 1000))
    numerics.add_real_mults(metric_mults)
    ber = errors / (frames * n_info)
    avg = metric_mults / max(n_metrics, 1)
    return SweepRecord(scheme=scheme, d=d, m=m, snr_db=snr_db, trials=frames,
                       bit_errors=errors, ber=ber, avg_real_mults=avg,
                       wall_ms=wall_ms)


def run_point(cfg: SimConfig, snr_idx, stop_on_errors=True) -> SweepRecord:
    if cfg.scheme in CODED_SCHEMES:
        return _run_coded_point(cfg, snr_idx, stop_on_errors)
    return _run_uncoded_point(cfg, snr_idx, stop_on_errors)


def _run_sweep(cfg: SimConfig, stop_on_errors) -> list:
    cfg = cfg.validated()
    indices = range(len(cfg.snr_db))
    if cfg.workers > 1:
        with ThreadPoolExecutor(max_workers=cfg.workers) as ex:
            records = list(ex.map(
                lambda i: run_point(cfg, i, stop_on_errors), indices))
    else:
        records = [run_point(cfg, i, stop_on_errors) for i in indices]
    if cfg.out_path:
        write_csv(cfg.out_path, records)
    return records


def run_ber_sweep(cfg: SimConfig) -> list:
    """Simulate until the error target (or trial cap) at every SNR point."""
    return _run_sweep(cfg, stop_on_errors=True)


def run_complexity_sweep(cfg: SimConfig) -> list:
    """Average the multiplication tallies over exactly max_trials trials."""
    return _run_sweep(cfg, stop_on_errors=False)


# ---------------------------------------------------------------------------
# validation suite
# ---------------------------------------------------------------------------


def check_generation_unitarity(code=None):
    """Generation matrices must be unitary with a fully nonzero first row."""
    codes = [code] if code is not None else [pstbc.generation_matrix(2),
                                             pstbc.generation_matrix(4)]
    worst = 0.0
    for cd in codes:
        g = cd.g_matrix
        worst = max(worst, float(np.abs(g.conj().T @ g - np.eye(cd.d)).max()))
        if np.abs(g[0]).min() <= 0:
            return False, "zero entry in the first generation row"
    return worst <= 1e-10, f"max unitarity residual {worst:.2e}"


def check_quartic_roots():
    th = pstbc.dim4_angles()
    res = float(np.abs(th**4 - th**3 - 4 * th**2 + 4 * th + 1).max())
    return res <= 1e-12, f"max quartic residual {res:.2e}"


def check_thread_roundtrip(code=None, phases=None, n_trials=200, seed=0):
    """assemble -> extract must invert exactly: y_breve = Phi_v Lam G x_v."""
    rng = np.random.default_rng(seed)
    codes = [code] if code is not None else [pstbc.generation_matrix(2),
                                             pstbc.generation_matrix(4)]
    worst = 0.0
    for cd in codes:
        d = cd.d
        phs = phases if phases is not None else [
            np.diag(pstbc.phase_matrix(cd, v)) for v in range(1, d + 1)]
        for _ in range(n_trials):
            x = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
            lam = np.sort(np.abs(rng.standard_normal(d)) + 0.1)[::-1]
            y = lam[:, None] * pstbc.assemble(x, cd).z
            for v in range(d):
                yb = np.array([y[u, (u + v) % d] for u in range(d)])
                expect = phs[v] * (lam * (cd.g_matrix @ x[:, v]))
                worst = max(worst, float(np.abs(yb - expect).max()))
    return worst <= 1e-9, f"max extraction residual {worst:.2e}"


def check_energy_uniformity(n_draws=100_000, seed=0):
    """Average transmitted energy must be uniform across codeword entries.

    Each codeword entry is a wrap phase times g_u^T x_v, so per-entry
    energy is estimated from n_draws vector symbols per thread.
    """
    rng = np.random.default_rng(seed)
    worst_rel = 0.0
    for d in (2, 4):
        code = pstbc.generation_matrix(d)
        c = modulation.square_qam(4)
        acc = np.zeros((d, d))
        for v in range(d):
            xs = c.points[rng.integers(0, 4, size=(n_draws, d))]
            w = np.abs(xs @ code.g_matrix.T) ** 2   # (n, d): row u = |g_u^T x|^2
            for u in range(d):
                acc[u, (u + v) % d] = np.mean(w[:, u])
        worst_rel = max(worst_rel, float(np.abs(acc - 1.0).max()))
    return worst_rel <= 0.02, f"max |E|z|^2 - 1| = {worst_rel:.3f}"


def check_real_r(n_channels=10_000, seed=0, tol=1e-10):
    """R from QR of diag(lam) G is real for both dimensions."""
    rng = np.random.default_rng(seed)
    worst = 0.0
    for d in (2, 4):
        g = pstbc.generation_matrix(d).g_matrix
        h = (rng.standard_normal((n_channels, d, d))
             + 1j * rng.standard_normal((n_channels, d, d))) / np.sqrt(2)
        s = np.linalg.svd(h, compute_uv=False)
        lam_g = s[:, :, None] * g[None, :, :]
        q, r = np.linalg.qr(lam_g)
        diag = np.einsum("nii->ni", r)
        ph = np.where(np.abs(diag) > 0, diag / np.abs(diag), 1.0)
        r = r * np.conj(ph)[:, :, None]
        worst = max(worst, float(np.abs(r.imag).max()))
    return worst <= tol, f"max |Im R| = {worst:.2e}"


def check_closed_form_r(n_lambdas=10_000, seed=0, tol=1e-9):
    """Closed-form R (weighted Gram + triangular recursion) matches QR."""
    from . import pcmb_decoder
    rng = np.random.default_rng(seed)
    worst = 0.0
    for d in (2, 4):
        code = pstbc.generation_matrix(d)
        for _ in range(n_lambdas):
            lam = np.sort(np.abs(rng.standard_normal(d)) + 1e-3)[::-1]
            rc = pcmb_decoder.closed_form_r(lam, code)
            rq = numerics.qr(lam[:, None] * code.g_matrix).r
            worst = max(worst, float(np.abs(rc - rq.real).max()))
    return worst <= tol, f"max |closed-form - QR| = {worst:.2e}"


def check_ml_equivalence(n_trials=200, seed=0):
    """Per-thread decoding equals joint exhaustive ML (2x2, 4-QAM)."""
    from . import pcmb_decoder, spheredec
    rng = np.random.default_rng(seed)
    code = pstbc.generation_matrix(2)
    c = modulation.square_qam(4)
    mismatches = 0
    for _ in range(n_trials):
        lam = np.sort(np.abs(rng.standard_normal(2)) + 0.1)[::-1]
        labels = rng.integers(0, 4, size=(2, 2))
        z = pstbc.assemble(c.points[labels], code).z
        y = lam[:, None] * z + 0.5 * (rng.standard_normal((2, 2))
                                      + 1j * rng.standard_normal((2, 2)))
        xhat = pcmb_decoder.decode_pcmb(y, lam, code, c)
        a = np.empty((4, 4), dtype=np.complex128)
        for v in range(2):
            for u in range(2):
                e = np.zeros((2, 2), dtype=np.complex128)
                e[u, v] = 1.0
                a[:, v * 2 + u] = (lam[:, None] * pstbc.assemble(e, code).z).T.ravel()
        res = spheredec.brute_force_ml(y.T.ravel(), a, c, 4)
        xoracle = np.empty((2, 2), dtype=np.complex128)
        for v in range(2):
            for u in range(2):
                xoracle[u, v] = res.point[v * 2 + u]
        m1 = float(np.sum(np.abs(y - lam[:, None] * pstbc.assemble(xhat, code).z) ** 2))
        if abs(m1 - res.metric) > 1e-9:
            mismatches += 1
    return mismatches == 0, f"{mismatches}/{n_trials} metric mismatches"


def check_metric_chain(n_trials=100, seed=0):
    """Split, unsplit and exhaustive bit metrics tell the same story."""
    from . import pcmb_decoder
    rng = np.random.default_rng(seed)
    code = pstbc.generation_matrix(2)
    c = modulation.square_qam(4)
    worst = 0.0
    for _ in range(n_trials):
        lam = np.sort(np.abs(rng.standard_normal(2)) + 0.1)[::-1]
        pre = pcmb_decoder.precompute(lam, code)
        labels = rng.integers(0, 4, size=(2, 2))
        z = pstbc.assemble(c.points[labels], code).z
        y = lam[:, None] * z + 0.4 * (rng.standard_normal((2, 2))
                                      + 1j * rng.standard_normal((2, 2)))
        obs = pcmb_decoder.extract_threads(y, code, pre)
        loc = bicmb.BitLocation(k=0, m=int(rng.integers(1, 3)),
                                n=int(rng.integers(1, 3)),
                                j=int(rng.integers(0, 2)))
        o = obs[loc.m - 1]
        d0 = (bicmb.bit_metric(o, pre, loc, 0, c)
              - bicmb.bit_metric(o, pre, loc, 1, c))
        d1 = (bicmb.bit_metric_unsplit(o, pre, loc, 0, c)
              - bicmb.bit_metric_unsplit(o, pre, loc, 1, c))
        d2 = (bicmb.bit_metric_exhaustive(o, pre, loc, 0, c)
              - bicmb.bit_metric_exhaustive(o, pre, loc, 1, c))
        worst = max(worst, abs(d0 - d1), abs(d1 - d2))
    return worst <= 1e-9, f"max metric-difference spread {worst:.2e}"


def check_modulation():
    for m in modulation.SUPPORTED_SIZES:
        c = modulation.square_qam(m)
        energy = float(np.mean(np.abs(c.points) ** 2))
        if abs(energy - 1.0) > 1e-12:
            return False, f"M={m}: energy {energy}"
        for j in range(c.nbits):
            s0, s1 = c.subset(j, 0), c.subset(j, 1)
            if len(s0) != m // 2 or len(s1) != m // 2 or set(s0) & set(s1):
                return False, f"M={m}: bad subsets at bit {j}"
    return True, "energy and subsets OK for all sizes"


VALIDATION_CHECKS = (
    ("generation-unitarity", check_generation_unitarity),
    ("quartic-roots", check_quartic_roots),
    ("thread-roundtrip", check_thread_roundtrip),
    ("energy-uniformity", check_energy_uniformity),
    ("real-R", check_real_r),
    ("closed-form-R", check_closed_form_r),
    ("ml-oracle-equivalence", check_ml_equivalence),
    ("metric-chain", check_metric_chain),
    ("modulation", check_modulation),
)


def validate(out=print):
    """Run the invariant suite; returns True when everything passes."""
    all_ok = True
    for name, fn in VALIDATION_CHECKS:
        ok, detail = fn()
        all_ok &= ok
        out(f"{'PASS' if ok else 'FAIL'}  {name:24s} {detail}")
    return all_ok
