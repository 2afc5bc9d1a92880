"""Declarative scenarios: metric families, task selection, field files.

A scenario is a single TOML document naming a grid, a metric built from
trig polynomials (exactly representable on the grid, so realization is
pure and deterministic), a task, and optional tolerance overrides.
Binary field files use a fixed 64-byte text header followed by raw
little-endian payload so external plotting tools can read them with a
few lines of any language.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

try:
    import tomllib
except ModuleNotFoundError:
    import tomli as tomllib

from .errors import AliasedMode, FieldFormatError, LostPositivity, ScenarioError
from .geometry import HermitianMetricField, flat
from .grid import GridSpec, ScalarField

_HEADER_BYTES = 64
_FIELD_MAGIC = "CEXF1"
_METRIC_MAGIC = "CEXM1"


@dataclass(frozen=True)
class TrigTerm:
    """amplitude * cos(2 pi <mode, x> + phase) over the 2n torus axes."""

    mode: tuple
    amplitude: float
    phase: float = 0.0

    def max_mode(self) -> int:
        return max(abs(int(m)) for m in self.mode)


@dataclass(frozen=True)
class MetricSpec:
    """One of the builtin families; realized lazily against a grid.

    kind "flat": identity everywhere.
    kind "conformal_flat": e^phi times identity, phi a trig polynomial.
    kind "perturbed_hermitian": identity plus per-entry trig polynomials,
        Hermitian-symmetrized, rejected if any eigenvalue dips under the
        0.1 margin anywhere on the grid.
    kind "explicit_file": load a stored metric field.
    """

    kind: str
    terms: tuple = ()
    entries: tuple = ()  # (row, col, component, terms) with 1-based indices
    path: Optional[str] = None


@dataclass(frozen=True)
class TaskSpec:
    kind: str
    p_list: tuple = ()
    t_list: tuple = (0.0,)
    n_list: tuple = ()


@dataclass(frozen=True)
class Tolerances:
    """Three-level tolerance ladder with provenance for reports."""

    solver: float = 1e-10
    identity: float = 1e-8
    end_to_end: float = 1e-6
    source: str = "default"

    def override_all(self, value: float, source: str) -> "Tolerances":
        return Tolerances(value, value, value, source)


@dataclass(frozen=True)
class Scenario:
    name: str
    n: int
    N: int
    metric: MetricSpec
    task: TaskSpec
    tolerances: Tolerances = Tolerances()
    seed: int = 0

    @property
    def grid(self) -> GridSpec:
        return GridSpec(self.n, self.N)

    def as_dict(self) -> dict:
        return {
            "name": self.name, "n": self.n, "N": self.N, "seed": self.seed,
            "metric": {
                "kind": self.metric.kind,
                "terms": [list(t.mode) + [t.amplitude, t.phase]
                          for t in self.metric.terms],
                "entries": [
                    {"row": r, "col": c, "component": comp,
                     "terms": [list(t.mode) + [t.amplitude, t.phase] for t in ts]}
                    for (r, c, comp, ts) in self.metric.entries],
                "path": self.metric.path,
            },
            "task": {"kind": self.task.kind, "p": list(self.task.p_list),
                     "t": list(self.task.t_list), "N": list(self.task.n_list)},
            "tolerances": {"solver": self.tolerances.solver,
                           "identity": self.tolerances.identity,
                           "end_to_end": self.tolerances.end_to_end,
                           "source": self.tolerances.source},
        }


def _expect(cond: bool, ctx: str, msg: str) -> None:
    if not cond:
        raise ScenarioError("%s: %s" % (ctx, msg))


def _parse_terms(raw, naxes: int, ctx: str) -> tuple:
    _expect(isinstance(raw, list), ctx, "expected a list of term tables")
    out = []
    for k, t in enumerate(raw):
        tctx = "%s[%d]" % (ctx, k)
        _expect(isinstance(t, dict), tctx, "term must be a table")
        mode = t.get("mode")
        _expect(isinstance(mode, list) and len(mode) == naxes, tctx,
                "mode must list %d integers (one per torus axis)" % naxes)
        _expect(all(isinstance(m, int) for m in mode), tctx,
                "mode components must be integers")
        amp = t.get("amplitude")
        _expect(isinstance(amp, (int, float)), tctx, "amplitude must be a number")
        phase = t.get("phase", 0.0)
        _expect(isinstance(phase, (int, float)), tctx, "phase must be a number")
        out.append(TrigTerm(tuple(int(m) for m in mode), float(amp), float(phase)))
    return tuple(out)


def _parse_metric(raw, n: int, ctx: str) -> MetricSpec:
    _expect(isinstance(raw, dict), ctx, "expected a [metric] table")
    kind = raw.get("kind")
    naxes = 2 * n
    if kind == "flat":
        return MetricSpec("flat")
    if kind == "conformal_flat":
        return MetricSpec("conformal_flat",
                          terms=_parse_terms(raw.get("terms", []), naxes,
                                             ctx + ".terms"))
    if kind == "perturbed_hermitian":
        entries = []
        raw_entries = raw.get("entries", [])
        _expect(isinstance(raw_entries, list), ctx + ".entries",
                "expected a list of entry tables")
        for k, e in enumerate(raw_entries):
            ectx = "%s.entries[%d]" % (ctx, k)
            _expect(isinstance(e, dict), ectx, "entry must be a table")
            row, col = e.get("row"), e.get("col")
            _expect(isinstance(row, int) and 1 <= row <= n, ectx,
                    "row must be an integer in 1..%d" % n)
            _expect(isinstance(col, int) and 1 <= col <= n, ectx,
                    "col must be an integer in 1..%d" % n)
            comp = e.get("component", "re")
            _expect(comp in ("re", "im"), ectx, "component must be 're' or 'im'")
            terms = _parse_terms(e.get("terms", []), naxes, ectx + ".terms")
            entries.append((row, col, comp, terms))
        return MetricSpec("perturbed_hermitian", entries=tuple(entries))
    if kind == "explicit_file":
        path = raw.get("path")
        _expect(isinstance(path, str) and path, ctx, "path must be a nonempty string")
        return MetricSpec("explicit_file", path=path)
    raise ScenarioError(
        "%s.kind: unknown metric kind %r (flat | conformal_flat | "
        "perturbed_hermitian | explicit_file)" % (ctx, kind))


def _parse_task(raw, ctx: str) -> TaskSpec:
    _expect(isinstance(raw, dict), ctx, "expected a [task] table")
    kind = raw.get("kind")
    if kind in ("solve", "verify"):
        return TaskSpec(kind)
    if kind == "calabi":
        p_list = raw.get("p", [2.0])
        _expect(isinstance(p_list, list) and p_list, ctx + ".p",
                "expected a nonempty list of exponents")
        _expect(all(isinstance(p, (int, float)) and p > 1 for p in p_list),
                ctx + ".p", "every exponent must be a number > 1")
        t_list = raw.get("t", [0.0])
        _expect(isinstance(t_list, list) and t_list, ctx + ".t",
                "expected a nonempty list of ray parameters")
        return TaskSpec("calabi", p_list=tuple(float(p) for p in p_list),
                        t_list=tuple(float(t) for t in t_list))
    if kind == "sweep":
        n_list = raw.get("N", [8, 16, 32])
        _expect(isinstance(n_list, list) and len(n_list) >= 2, ctx + ".N",
                "expected a list of at least two grid sizes")
        _expect(all(isinstance(v, int) for v in n_list), ctx + ".N",
                "grid sizes must be integers")
        _expect(list(n_list) == sorted(n_list), ctx + ".N",
                "grid sizes must be ascending")
        return TaskSpec("sweep", n_list=tuple(n_list))
    raise ScenarioError("%s.kind: unknown task kind %r "
                        "(solve | verify | calabi | sweep)" % (ctx, kind))


def parse_scenario(doc: dict, origin: str = "<scenario>") -> Scenario:
    _expect(isinstance(doc, dict), origin, "top level must be a table")
    name = doc.get("name")
    _expect(isinstance(name, str) and name, origin + ".name",
            "name must be a nonempty string")
    n = doc.get("n")
    _expect(isinstance(n, int) and n >= 2, origin + ".n",
            "n must be an integer >= 2")
    N = doc.get("N")
    _expect(isinstance(N, int) and N >= 4 and (N & (N - 1)) == 0, origin + ".N",
            "N must be a power of two >= 4")
    seed = doc.get("seed", 0)
    _expect(isinstance(seed, int), origin + ".seed", "seed must be an integer")

    metric = _parse_metric(doc.get("metric"), n, origin + ".metric")
    task = _parse_task(doc.get("task"), origin + ".task")

    tol = Tolerances()
    raw_tol = doc.get("tolerances")
    if raw_tol is not None:
        _expect(isinstance(raw_tol, dict), origin + ".tolerances",
                "expected a [tolerances] table")
        vals = {}
        for key in ("solver", "identity", "end_to_end"):
            if key in raw_tol:
                v = raw_tol[key]
                _expect(isinstance(v, (int, float)) and v > 0,
                        "%s.tolerances.%s" % (origin, key),
                        "tolerance must be a positive number")
                vals[key] = float(v)
        if vals:
            tol = Tolerances(vals.get("solver", tol.solver),
                             vals.get("identity", tol.identity),
                             vals.get("end_to_end", tol.end_to_end),
                             source="scenario")

    sc = Scenario(name=name, n=n, N=N, metric=metric, task=task,
                  tolerances=tol, seed=seed)
    # surface aliasing problems at load time, not at realize time
    if metric.kind in ("conformal_flat", "perturbed_hermitian"):
        worst = _max_mode(metric)
        if worst >= N // 2:
            raise AliasedMode(
                "%s.metric: mode magnitude %d is not representable at N=%d "
                "(needs max mode < N/2)" % (origin, worst, N))
    return sc


def load_scenario(path: str) -> Scenario:
    try:
        with open(path, "rb") as fh:
            doc = tomllib.load(fh)
    except FileNotFoundError:
        raise ScenarioError("%s: no such scenario file" % path)
    except tomllib.TOMLDecodeError as exc:
        raise ScenarioError("%s: TOML parse error: %s" % (path, exc))
    return parse_scenario(doc, origin=path)


def _max_mode(mspec: MetricSpec) -> int:
    worst = 0
    for t in mspec.terms:
        worst = max(worst, t.max_mode())
    for (_, _, _, terms) in mspec.entries:
        for t in terms:
            worst = max(worst, t.max_mode())
    return worst


def trig_field(spec: GridSpec, terms) -> ScalarField:
    """Evaluate a sum of cosine terms on the grid."""
    vals = np.zeros(spec.shape)
    for t in terms:
        if t.max_mode() >= spec.N // 2:
            raise AliasedMode(
                "mode %s needs max component < N/2 = %d" % (list(t.mode), spec.N // 2))
        arg = np.zeros(spec.shape)
        for ax, m in enumerate(t.mode):
            if m:
                arg = arg + 2.0 * np.pi * m * spec.coordinate(ax)
        vals = vals + t.amplitude * np.cos(arg + t.phase)
    return ScalarField(spec, vals)


def conformal_factor_field(mspec: MetricSpec, spec: GridSpec) -> ScalarField:
    """The phi with metric = e^phi * identity; only for conformal_flat."""
    if mspec.kind != "conformal_flat":
        raise ScenarioError("conformal factor is defined only for "
                            "conformal_flat metrics, got %r" % mspec.kind)
    return trig_field(spec, mspec.terms)


def realize(mspec: MetricSpec, spec: GridSpec) -> HermitianMetricField:
    """Build the metric field; pure, deterministic, bit-stable."""
    if mspec.kind == "flat":
        return flat(spec)
    if mspec.kind == "conformal_flat":
        phi = trig_field(spec, mspec.terms)
        return flat(spec).conformal_scale(phi)
    if mspec.kind == "perturbed_hermitian":
        n = spec.n
        g = np.zeros(spec.shape + (n, n), dtype=complex)
        idx = np.arange(n)
        g[..., idx, idx] = 1.0
        for (row, col, comp, terms) in mspec.entries:
            if row == col and comp == "im":
                raise ScenarioError(
                    "metric entry (%d,%d): diagonal entries must be real"
                    % (row, col))
            bump = trig_field(spec, terms).values
            v = 1j * bump if comp == "im" else bump + 0j
            g[..., row - 1, col - 1] += v
            if row != col:
                g[..., col - 1, row - 1] += np.conj(v)
        # exact by construction; guards explicit files routed through here
        g = 0.5 * (g + np.conj(np.swapaxes(g, -1, -2)))
        _check_margin(spec, g)
        return HermitianMetricField(spec, g)
    if mspec.kind == "explicit_file":
        metric = read_metric(mspec.path)
        if metric.spec != spec:
            raise ScenarioError(
                "metric file %s holds n=%d N=%d, scenario wants n=%d N=%d"
                % (mspec.path, metric.spec.n, metric.spec.N, spec.n, spec.N))
        return metric
    raise ScenarioError("unknown metric kind %r" % mspec.kind)


def _check_margin(spec: GridSpec, g: np.ndarray, margin: float = 0.1) -> None:
    eigs = np.linalg.eigvalsh(g)
    mins = eigs[..., 0]
    worst = float(mins.min())
    if worst < margin - 1e-12:
        at = tuple(int(i) for i in np.unravel_index(int(np.argmin(mins)), spec.shape))
        point = tuple(float(i) / spec.N for i in at)
        raise LostPositivity(
            "perturbed metric loses the 0.1 eigenvalue margin: min eigenvalue "
            "%.6f at grid index %s (coordinates %s)" % (worst, at, point))


# ---------------------------------------------------------------------------
# field and metric files

def _make_header(magic: str, n: int, N: int, count: int) -> bytes:
    text = "%s n=%d N=%d order=interleaved count=%d" % (magic, n, N, count)
    raw = text.encode("ascii")
    if len(raw) > _HEADER_BYTES - 1:
        raise FieldFormatError("header does not fit 64 bytes: %r" % text)
    return raw + b" " * (_HEADER_BYTES - 1 - len(raw)) + b"\n"


def _parse_header(raw: bytes, magic: str, path: str) -> tuple:
    if len(raw) != _HEADER_BYTES:
        raise FieldFormatError("%s: truncated header (%d bytes)" % (path, len(raw)))
    try:
        text = raw.decode("ascii").strip()
    except UnicodeDecodeError:
        raise FieldFormatError("%s: header is not ascii" % path)
    parts = text.split()
    if not parts or parts[0] != magic:
        raise FieldFormatError("%s: bad magic, expected %s" % (path, magic))
    kv = {}
    for tok in parts[1:]:
        if "=" not in tok:
            raise FieldFormatError("%s: malformed header token %r" % (path, tok))
        k, v = tok.split("=", 1)
        kv[k] = v
    try:
        n = int(kv["n"])
        N = int(kv["N"])
        count = int(kv["count"])
    except (KeyError, ValueError):
        raise FieldFormatError("%s: header must carry integer n, N, count" % path)
    if kv.get("order") != "interleaved":
        raise FieldFormatError("%s: unsupported axis order %r"
                               % (path, kv.get("order")))
    return n, N, count


def write_field(f: ScalarField, path: str) -> None:
    """Binary scalar field: 64-byte text header + little-endian float64."""
    count = f.values.size
    with open(path, "wb") as fh:
        fh.write(_make_header(_FIELD_MAGIC, f.spec.n, f.spec.N, count))
        fh.write(np.ascontiguousarray(f.values, dtype="<f8").tobytes())


def read_field(path: str) -> ScalarField:
    with open(path, "rb") as fh:
        n, N, count = _parse_header(fh.read(_HEADER_BYTES), _FIELD_MAGIC, path)
        payload = fh.read()
    spec = GridSpec(n, N)
    if count != spec.npts:
        raise FieldFormatError("%s: header count %d does not match n=%d N=%d "
                               "(expected %d)" % (path, count, n, N, spec.npts))
    data = np.frombuffer(payload, dtype="<f8")
    if data.size != count:
        raise FieldFormatError("%s: payload holds %d values, header says %d"
                               % (path, data.size, count))
    return ScalarField(spec, data.reshape(spec.shape).copy())


def write_metric(metric: HermitianMetricField, path: str) -> None:
    """Binary metric field: header + little-endian complex128, row-major
    with the two matrix indices fastest."""
    count = metric.values.size
    with open(path, "wb") as fh:
        fh.write(_make_header(_METRIC_MAGIC, metric.spec.n, metric.spec.N, count))
        fh.write(np.ascontiguousarray(metric.values, dtype="<c16").tobytes())


def read_metric(path: str) -> HermitianMetricField:
    try:
        with open(path, "rb") as fh:
            n, N, count = _parse_header(fh.read(_HEADER_BYTES), _METRIC_MAGIC, path)
            payload = fh.read()
    except FileNotFoundError:
        raise FieldFormatError("%s: no such metric file" % path)
    spec = GridSpec(n, N)
    expected = spec.npts * n * n
    if count != expected:
        raise FieldFormatError("%s: header count %d does not match n=%d N=%d "
                               "(expected %d)" % (path, count, n, N, expected))
    data = np.frombuffer(payload, dtype="<c16")
    if data.size != count:
        raise FieldFormatError("%s: payload holds %d values, header says %d"
                               % (path, data.size, count))
    return HermitianMetricField(spec, data.reshape(spec.shape + (n, n)).copy())


def export_csv(f: ScalarField, path: str) -> None:
    """Full grid enumeration with a coordinate header row."""
    spec = f.spec
    cols = []
    for j in range(1, spec.n + 1):
        cols.extend(["x%d" % j, "y%d" % j])
    cols.append("value")
    with open(path, "w") as fh:
        fh.write(",".join(cols) + "\n")
        inv = 1.0 / spec.N
        for idx in np.ndindex(spec.shape):
            coords = ["%.17g" % (i * inv) for i in idx]
            fh.write(",".join(coords + ["%.17g" % f.values[idx]]) + "\n")
