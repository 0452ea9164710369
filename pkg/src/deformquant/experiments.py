"""Random ensembles and the three experiment suites behind the command line.

Every suite returns ``(rows, tables)``: ``rows`` are gate records
``{suite, check, identity, params, value, gate, passed}`` and ``tables`` maps
a file stem to a list of dict rows (convergence sweeps, verdicts).
"""
import numpy as np

from .algebra import cstar_norm, identity
from .deform import (
    Composition,
    Heisenberg,
    LinearCombination,
    RankOne,
    deformed_product,
    identity_operator,
    l1_fourier_norm,
    op_L,
    op_R,
)
from .fourier import fourier, fourier_inv, inverse_array
from .grid import GridFunction, SkewForm, TorusGrid, inner_product_E, norm_E, norm_L2
from .mollifier import (
    MollifierFamily,
    approx_identity_test,
    default_m_sweep,
    derivation_decay_test,
    resolved_max_m,
)
from .symbol import (
    IS_LEFT_MULT,
    NOT_IN_COMMUTANT,
    RECONSTRUCTION_MISMATCH,
    ProbeSet,
    extract_symbol,
    restrict,
    symbol_convergence_test,
    verify_conjecture,
)

# ---------------------------------------------------------------------------
# ensembles


def default_band(grid):
    """Largest band K with 3K < N/2, so products of three members never wrap."""
    return max(1, (grid.N // 2 - 1) // 3)


def random_band_limited(grid, k, rng, band=None):
    """Trigonometric polynomial sum_j c_j exp(i <xi_j, x>), |j_a| <= band, c_j complex normal."""
    band = default_band(grid) if band is None else band
    if band >= grid.N // 2:
        raise ValueError("band must stay below the Nyquist mode")
    j = grid.mode_indices()
    mask = (np.abs(j) <= band).all(axis=-1)
    count = int(mask.sum())
    coef = np.zeros(grid.shape + (k, k), dtype=np.complex128)
    coef[mask] = (rng.standard_normal((count, k, k)) + 1j * rng.standard_normal((count, k, k))) / np.sqrt(2 * count)
    hat = coef * (2 * np.pi) ** (grid.n / 2) / grid.cell("frequency")
    return GridFunction(grid, inverse_array(hat, grid))


def random_lattice_modes(grid, rng, count, band):
    return rng.integers(-band, band + 1, size=(count, grid.n))


def gaussian(grid, width, k=1):
    vals = np.exp(-np.sum(grid.points() ** 2, axis=-1) / (2 * width ** 2))
    return GridFunction.scalar(grid, vals, k)


def _rng(seed, *tags):
    return np.random.default_rng([seed] + [abs(hash_tag(t)) for t in tags])


def hash_tag(t):
    """Stable small integer for a tag (Python's hash is salted per process)."""
    if isinstance(t, (int, np.integer)):
        return int(t)
    return sum((i + 1) * ord(c) for i, c in enumerate(str(t)))


def _row(suite, check, identity_name, params, value, gate, passed):
    return {
        "suite": suite,
        "check": check,
        "identity": identity_name,
        "params": params,
        "value": float(value),
        "gate": gate,
        "passed": bool(passed),
    }


def _rel(a, b):
    scale = max(np.max(np.abs(a.values)), np.max(np.abs(b.values)), 1e-300)
    return float(np.max(np.abs(a.values - b.values)) / scale)


# ---------------------------------------------------------------------------
# identities


def suite_identities(cfg):
    grid = TorusGrid(cfg.n, cfg.N, cfg.L)
    rows = []
    for k in cfg.ks:
        for label, J in cfg.skew_forms():
            p = f"n={cfg.n} N={cfg.N} k={k} {label}"
            rng = _rng(cfg.seed, "identities", k, label)
            rand = lambda: random_band_limited(grid, k, rng)  # noqa: E731

            worst = 0.0
            for _ in range(cfg.trials_for("plancherel")):
                f, g = rand(), rand()
                Ff = fourier(f)
                worst = max(worst, abs(norm_E(Ff) - norm_E(f)) / norm_E(f))
                G = fourier(g)
                lhs = inner_product_E(Ff, G)
                rhs = inner_product_E(f, fourier_inv(G))
                worst = max(worst, float(cstar_norm(lhs - rhs)) / (norm_E(f) * norm_E(g)))
            rows.append(_row("identities", "plancherel", "Fourier isometry and adjointness", p, worst, 1e-12, worst <= 1e-12))

            worst = 0.0
            pts = grid.points()
            band = grid.N // 4
            count = cfg.trials_for("weyl")
            for a, b in zip(random_lattice_modes(grid, rng, count, band), random_lattice_modes(grid, rng, count, band)):
                xa, xb = a * grid.dxi, b * grid.dxi
                ea = GridFunction(grid, np.exp(1j * pts @ xa))
                eb = GridFunction(grid, np.exp(1j * pts @ xb))
                want = np.exp(1j * xb @ J.matrix @ xa / (2 * np.pi)) * np.exp(1j * pts @ (xa + xb))
                got = deformed_product(ea, eb, J).values[..., 0, 0]
                worst = max(worst, float(np.max(np.abs(got - want))))
            rows.append(_row("identities", "weyl", "plane-wave product phase", p, worst, 1e-12, worst <= 1e-12))

            hom = inv = 0.0
            for _ in range(cfg.trials_for("homomorphism")):
                f, g, h = rand(), rand(), rand()
                fg = deformed_product(f, g, J)
                lhs = op_L(f, J).apply(op_L(g, J).apply(h))
                hom = max(hom, norm_E(lhs - op_L(fg, J).apply(h)) / norm_E(h))
                a = fg.adjoint_pointwise()
                b = deformed_product(g.adjoint_pointwise(), f.adjoint_pointwise(), J)
                inv = max(inv, _rel(a, b))
            rows.append(_row("identities", "homomorphism", "L_f L_g = L_{f x g}", p, hom, 1e-10, hom <= 1e-10))
            rows.append(_row("identities", "involution", "(f x g)* = g* x f*", p, inv, 1e-10, inv <= 1e-10))

            if not J.matrix.any():
                worst = 0.0
                for _ in range(cfg.trials_for("undeformed")):
                    f, g = rand(), rand()
                    worst = max(worst, _rel(deformed_product(f, g, J), f.pointwise(g)))
                rows.append(_row("identities", "undeformed", "J = 0 gives the pointwise product", p, worst, 1e-12, worst <= 1e-12))

            violations = 0
            for _ in range(cfg.trials_for("l2_bound")):
                f, g = rand(), rand()
                lhs = norm_L2(op_L(f, J).apply(g))
                rhs = (2 * np.pi) ** (-grid.n / 2) * l1_fourier_norm(f) * norm_L2(g)
                violations += lhs > rhs * (1 + 1e-12)
            rows.append(_row("identities", "l2_bound", "L2 bound by the l1 norm of the spectrum", p, violations, 0, violations == 0))

            worst = 0.0
            for _ in range(cfg.trials_for("commutation")):
                f, g, h = rand(), rand(), rand()
                L, R = op_L(f, J), op_R(g, J)
                worst = max(worst, norm_E(L.apply(R.apply(h)) - R.apply(L.apply(h))) / norm_E(h))
            rows.append(_row("identities", "commutation", "[L_f, R_g] = 0", p, worst, 1e-10, worst <= 1e-10))

            worst = 0.0
            zero = np.zeros((1, grid.n), dtype=int)
            for _ in range(cfg.trials_for("left_inverse")):
                f = rand()
                back = restrict(extract_symbol(op_L(f, J), zero))
                worst = max(worst, _rel(back, f))
            rows.append(_row("identities", "left_inverse", "restriction of the symbol of L_f is f", p, worst, 1e-12, worst <= 1e-12))
    return rows, {}


# ---------------------------------------------------------------------------
# mollifier sweeps


def mollifier_grid(cfg, doubled=False):
    N, L = cfg.mollifier_N, cfg.mollifier_L
    if doubled:
        N, L = 2 * N, 2 * L
    return TorusGrid(cfg.n, N, L)


def mollifier_sweep(cfg, family, start=None):
    """Configured m values, or a geometric sweep over the resolved range.

    In two dimensions the function sweeps start at m = 2: at m = 1 the bump
    covers most of the lattice and every product costs the full double sum.
    """
    if cfg.m_list is not None:
        return family.admissible_ms(cfg.m_list)
    if start is None:
        start = 1 if cfg.n == 1 else 2
    return default_m_sweep(family, start=start)


SMOOTH_WIDTH = 3.0


def _nonincreasing(values, slack=1e-12):
    return all(b <= a + slack for a, b in zip(values, values[1:]))


def symbol_samples(grid):
    """Nine (x index, mode) pairs around the origin of phase space."""
    c = grid.N // 2
    step = max(1, round(1.5 / grid.h))
    xs = [(c - step,) + (c,) * (grid.n - 1), (c,) * grid.n, (c + step,) * grid.n]
    modes = [(-2,) + (0,) * (grid.n - 1), (0,) * grid.n, (2,) * grid.n]
    return [(x, m) for x in xs for m in modes]


DERIVATIONS = {
    "d1": lambda n: [(1.0, (1,) + (0,) * (2 * n - 1))],
    "d1^2": lambda n: [(1.0, (2,) + (0,) * (2 * n - 1))],
    "d_mod1": lambda n: [(1.0, (0,) * n + (1,) + (0,) * (n - 1))],
}


def suite_mollifier(cfg):
    rows, tables = [], {}
    grid = mollifier_grid(cfg)
    fam = MollifierFamily(grid)
    ms = mollifier_sweep(cfg, fam)
    if len(ms) < 2:
        raise ValueError("the mollifier sweep needs at least two admissible m")
    big = mollifier_grid(cfg, doubled=True)
    big_fam = MollifierFamily(big)
    forms = cfg.skew_forms()
    for k in cfg.ks:
        g = gaussian(grid, SMOOTH_WIDTH, k)
        g_big = gaussian(big, SMOOTH_WIDTH, k)
        for label, J in forms:
            p = f"n={cfg.n} N={grid.N} k={k} {label}"
            Jb = SkewForm(J.matrix)
            tab = approx_identity_test(g, fam, ms, Jb)
            res = [r["residual"] for r in tab]
            top = resolved_max_m(big_fam)
            fin_big = approx_identity_test(g_big, big_fam, [top], Jb)[0]["residual"]
            tab.append({"m": top, "residual": fin_big, "N": big.N})
            tables[f"approx_identity_k{k}_{_stem(label)}"] = tab
            ok = _nonincreasing(res)
            rows.append(_row("mollifier", "approx_identity_monotone", "L_{e_m} g -> g", p, max(np.diff(res), default=0.0), 1e-12, ok))
            rel = res[-1] / norm_E(g)
            rows.append(_row("mollifier", "approx_identity_final", "L_{e_m} g -> g", p, rel, 1e-3, rel <= 1e-3))
            rows.append(_row("mollifier", "approx_identity_refinement", "L_{e_m} g -> g", p, fin_big / res[-1], 1.0, fin_big < res[-1]))

            if J.matrix.any() or cfg.n == 1:
                for name, make in DERIVATIONS.items():
                    D0 = make(cfg.n)
                    tab = derivation_decay_test(D0, g, fam, ms, Jb)
                    tables[f"derivation_{name}_k{k}_{_stem(label)}"] = tab
                    res = [r["residual"] for r in tab]
                    if res[0] == 0:
                        continue
                    ratio = res[-1] / res[0]
                    ok = _nonincreasing(res) and ratio <= 1e-2
                    rows.append(_row("mollifier", f"derivation_decay_{name}", "derivatives of L_{e_m} vanish", p, ratio, 1e-2, ok))

        label, J = forms[-1]
        rng = _rng(cfg.seed, "symbol", k)
        f = random_band_limited(grid, k, rng, band=8)
        f2 = random_band_limited(grid, k, rng, band=8)
        members = {
            "identity": identity_operator(grid, k),
            "left_mult": op_L(f, J),
            "commutant": LinearCombination([(1.0, Composition([op_L(f, J), op_L(f2, J)])), (0.5, identity_operator(grid, k))]),
        }
        samples = symbol_samples(grid)
        # plane-wave probes keep m = 1 cheap here
        sym_ms = mollifier_sweep(cfg, fam, start=1)
        for name, A in members.items():
            tab = symbol_convergence_test(A, fam, samples, sym_ms, J)
            tables[f"symbol_{name}_k{k}_{_stem(label)}"] = tab
            res = [r["residual"] for r in tab]
            ratio = res[-1] / res[0]
            ok = _nonincreasing(res) and ratio <= 1e-3
            p = f"n={cfg.n} N={grid.N} k={k} {label}"
            rows.append(_row("mollifier", f"symbol_convergence_{name}", "symbol of A o L_{e_m} -> symbol of A", p, ratio, 1e-3, ok))
    return rows, tables


def _stem(label):
    return label.replace("=", "").replace(".", "p")


# ---------------------------------------------------------------------------
# conjecture ensembles


PROBE_BANDS = (1, 1, 2, 5)
RANK_ONE_BAND = 1


def probe_set(grid, k, J, rng, bands=PROBE_BANDS):
    """Probe pairs (g, h) mixing smooth and default-band members, one per entry of ``bands``."""
    bands = [min(b, default_band(grid)) for b in bands]
    pairs = [
        (random_band_limited(grid, k, rng, band=b), random_band_limited(grid, k, rng, band=b))
        for b in bands
    ]
    return ProbeSet(pairs, J)


def translation_ensemble(grid, k):
    ops = []
    for i, frac in enumerate((1 / 4, 3 / 8, 1 / 2)):
        a = np.zeros(grid.n)
        a[0] = round(frac * grid.L / grid.h) * grid.h
        ops.append((f"translation_{i}", Heisenberg(grid, k, a=a)))
    return ops


def modulation_ensemble(grid, k):
    """Modulations far enough out that the twist J b / 2 pi moves R_g visibly."""
    ops = []
    for i, j in enumerate((grid.N // 4, grid.N // 4 + 2, grid.N // 2 - 4)):
        b = np.zeros(grid.n)
        b[-1] = j * grid.dxi
        ops.append((f"modulation_{i}", Heisenberg(grid, k, b=b)))
    return ops


def rank_one_ensemble(grid, k, rng, count=5):
    ops = []
    for i in range(count):
        v = random_band_limited(grid, k, rng, band=RANK_ONE_BAND)
        w = random_band_limited(grid, k, rng, band=RANK_ONE_BAND)
        ops.append((f"rank_one_{i}", RankOne(v / norm_E(v), w / norm_E(w))))
    return ops


def negative_ensemble(grid, k, J, rng):
    """Operators outside the commutant: rank-one maps, large translations and,
    when J is nonzero, large modulations (at J = 0 those are left multiplications)."""
    ops = rank_one_ensemble(grid, k, rng) + translation_ensemble(grid, k)
    if J.matrix.any():
        ops += modulation_ensemble(grid, k)
    return ops


def suite_conjecture(cfg):
    grid = TorusGrid(cfg.n, cfg.N, cfg.L)
    rows, verdicts = [], []
    mismatches = 0
    forms = cfg.skew_forms()
    strongest = max(float(np.max(np.abs(J.matrix))) for _, J in forms)
    for k in cfg.ks:
        for label, J in forms:
            p = f"n={cfg.n} N={cfg.N} k={k} {label}"
            rng = _rng(cfg.seed, "conjecture", k, label)
            probes = probe_set(grid, k, J, rng)
            positives = [("identity", identity_operator(grid, k), GridFunction.constant(grid, identity(k)))]
            for i in range(cfg.trials_for("positive")):
                f = random_band_limited(grid, k, rng)
                positives.append((f"left_mult_{i}", op_L(f, J), f))
            if not J.matrix.any():
                # undeformed: a modulation is multiplication by a plane wave
                for name, U in modulation_ensemble(grid, k):
                    wave = np.exp(1j * grid.points() @ U.b)
                    positives.append((name, U, GridFunction.scalar(grid, wave, k)))
            worst, all_left = 0.0, True
            for name, A, f in positives:
                v = verify_conjecture(A, J, probes, cfg.tol)
                rec = {**v.to_dict(), "operator": name, "expected": IS_LEFT_MULT, "J": label, "k": k}
                if v.kind == IS_LEFT_MULT:
                    rec["symbol_error"] = norm_E(v.f - f)
                    worst = max(worst, rec["symbol_error"])
                else:
                    all_left = False
                mismatches += v.kind == RECONSTRUCTION_MISMATCH
                verdicts.append(rec)
            ok = all_left and worst <= 1e-9
            rows.append(_row("conjecture", "positive", "commuting smooth operators are left multiplications", p, worst, 1e-9, ok))

            least, all_out = np.inf, True
            for name, A in negative_ensemble(grid, k, J, rng):
                v = verify_conjecture(A, J, probes, cfg.tol)
                verdicts.append({**v.to_dict(), "operator": name, "expected": NOT_IN_COMMUTANT, "J": label, "k": k})
                least = min(least, v.residual)
                all_out &= v.kind == NOT_IN_COMMUTANT
                mismatches += v.kind == RECONSTRUCTION_MISMATCH
            rows.append(_row("conjecture", "negative_verdicts", "non-members fail the commutant test", p, least, cfg.tol, all_out))
            if float(np.max(np.abs(J.matrix))) == strongest:
                rows.append(_row("conjecture", "negative_floor", "non-members fail the commutant test", p, least, cfg.floor, least >= cfg.floor))
    rows.append(_row("conjecture", "no_mismatch", "reconstruction never disagrees inside the commutant", f"n={cfg.n} N={cfg.N}", mismatches, 0, mismatches == 0))
    return rows, {"verdicts": verdicts}


SUITES = {
    "identities": suite_identities,
    "mollifier": suite_mollifier,
    "conjecture": suite_conjecture,
}
