"""YAML files describing domains and holomorphic maps.

Domain file::

    name: saddle
    dimension: 2
    defining_function: "+ re(2) * -1 abs2(1)"   # prefix notation, see koblab.expr
    enclosing_radius: 2
    regularity: real-analytic                   # C2 | C3 | C-one-one | real-analytic
    witness_point: ["0", "-0.5"]                # complex numbers as strings or [re, im]
    clip: true                                  # intersect with B(0, enclosing_radius)
    constraints: []                             # further pieces, all must be < 0
    pseudoconvex_known: false
    tubular_radius: 0.25
    gradient_bound: 5.0                         # optional, estimated when absent

Map file::

    name: identity
    dimension: 2
    components: ["z(1)", "z(2)"]

Malformed expressions raise :class:`SpecError` carrying the file line and
column of the offending token.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np
import yaml

from .expr import ParseError, ScalarField, parse_field
from .geometry import DomainSpec, estimate_gradient_bound, validate_domain
from .maps import HoloMapSpec, parse_map_component
from .models import ball_constraint

REGULARITIES = ("C2", "C3", "C-one-one", "real-analytic")


class SpecError(ValueError):
    def __init__(self, message, path=None, line=None, column=None):
        self.path, self.line, self.column = path, line, column
        where = ""
        if line is not None:
            where = f" (line {line}" + (f", column {column}" if column is not None else "") + ")"
        prefix = f"{path}: " if path else ""
        super().__init__(f"{prefix}{message}{where}")


def _compose(text, path):
    try:
        node = yaml.compose(text)
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        raise SpecError(f"invalid YAML: {getattr(exc, 'problem', exc)}", path,
                        None if mark is None else mark.line + 1,
                        None if mark is None else mark.column + 1) from None
    if not isinstance(node, yaml.MappingNode):
        raise SpecError("top level must be a mapping", path)
    data = yaml.safe_load(text)
    nodes = {k.value: v for k, v in node.value}
    return data, nodes


def _expr_position(node, column):
    """File line/column of a 1-based column inside a scalar's text."""
    line = node.start_mark.line + 1
    col = node.start_mark.column + column
    if node.style in ("'", '"'):
        col += 1
    return line, col


def _parse_expr(text, dim, node, path):
    if not isinstance(text, str):
        raise SpecError("expression must be a string", path, node.start_mark.line + 1)
    try:
        return parse_field(text, dim)
    except ParseError as exc:
        line, col = _expr_position(node, exc.column)
        raise SpecError(exc.message, path, line, col) from None


def parse_complex_vector(values, dim=None):
    """Entries as ``"a+bj"`` strings, numbers or ``[re, im]`` pairs."""
    if isinstance(values, str):
        values = [v for v in values.split(",") if v.strip()]
    out = []
    for v in values:
        if isinstance(v, (list, tuple)):
            if len(v) != 2:
                raise ValueError("complex pairs must have two entries")
            out.append(complex(float(v[0]), float(v[1])))
        elif isinstance(v, str):
            out.append(complex(v.replace(" ", "").replace("i", "j")))
        else:
            out.append(complex(v))
    arr = np.array(out, dtype=complex)
    if dim is not None and arr.size != dim:
        raise ValueError(f"expected {dim} entries, got {arr.size}")
    return arr


def domain_from_text(text: str, path=None, validate=True) -> DomainSpec:
    data, nodes = _compose(text, path)
    for key in ("dimension", "defining_function", "enclosing_radius"):
        if key not in data:
            raise SpecError(f"missing field {key!r}", path)
    dim = data["dimension"]
    if not isinstance(dim, int) or dim < 1:
        raise SpecError("dimension must be a positive integer", path, nodes["dimension"].start_mark.line + 1)
    R = float(data["enclosing_radius"])
    if R <= 0:
        raise SpecError("enclosing_radius must be positive", path, nodes["enclosing_radius"].start_mark.line + 1)
    field = _parse_expr(data["defining_function"], dim, nodes["defining_function"], path)
    extra = []
    if data.get("constraints"):
        for item, node in zip(data["constraints"], nodes["constraints"].value):
            extra.append(_parse_expr(item, dim, node, path))
    if data.get("clip", True):
        extra.insert(0, ball_constraint(dim, R))
    regularity = data.get("regularity", "C2")
    if regularity not in REGULARITIES:
        raise SpecError(f"regularity must be one of {REGULARITIES}", path,
                        nodes["regularity"].start_mark.line + 1)
    try:
        witness = parse_complex_vector(data.get("witness_point", ["0"] * dim), dim)
    except ValueError as exc:
        raise SpecError(f"bad witness_point: {exc}", path) from None
    gb = data.get("gradient_bound")
    gb = float(gb) if gb is not None else estimate_gradient_bound(field, R)
    try:
        dom = DomainSpec(
            field=field,
            enclosing_radius=R,
            gradient_bound=gb,
            regularity=regularity,
            witness_point=witness,
            constraints=tuple(extra),
            pseudoconvex_known=bool(data.get("pseudoconvex_known", False)),
            tubular_radius=float(data.get("tubular_radius", 0.1 * R)),
            name=str(data.get("name", Path(path).stem if path else "domain")),
        )
    except ValueError as exc:
        msg = str(exc).replace("witness point", "witness_point")
        raise SpecError(msg, path) from None
    if validate:
        report = validate_domain(dom)
        if not report.get("witness_interior", True):
            raise SpecError("witness_point is not interior (r must be negative there)", path)
        if not report["gradient_bound_ok"]:
            raise SpecError(f"gradient_bound {gb:g} below the sampled sup "
                            f"{report['sampled_gradient_sup']:.4g}", path)
    return dom


def load_domain(path) -> DomainSpec:
    path = Path(path)
    if not path.exists():
        raise SpecError("file not found", str(path))
    return domain_from_text(path.read_text(encoding="utf-8"), str(path))


def map_from_text(text: str, path=None) -> HoloMapSpec:
    data, nodes = _compose(text, path)
    for key in ("dimension", "components"):
        if key not in data:
            raise SpecError(f"missing field {key!r}", path)
    dim = data["dimension"]
    comps = []
    for item, node in zip(data["components"], nodes["components"].value):
        try:
            comps.append(parse_map_component(str(item)))
        except ParseError as exc:
            line, col = _expr_position(node, exc.column)
            raise SpecError(exc.message, path, line, col) from None
    h = HoloMapSpec(comps, dim, str(data.get("name", Path(path).stem if path else "map")))
    try:
        from .maps import _check_indices

        for c in comps:
            _check_indices(c, dim)
    except ValueError as exc:
        raise SpecError(str(exc), path) from None
    return h


def load_map(path) -> HoloMapSpec:
    path = Path(path)
    if not path.exists():
        raise SpecError("file not found", str(path))
    return map_from_text(path.read_text(encoding="utf-8"), str(path))


def domain_to_text(dom: DomainSpec) -> str:
    """Inverse of :func:`domain_from_text` for clipped smooth domains."""
    from .models import ball_constraint as _bc

    clip = any(c.prefix() == _bc(dom.dim, dom.enclosing_radius).prefix() for c in dom.constraints)
    extra = [c.prefix() for c in dom.constraints
             if c.prefix() != _bc(dom.dim, dom.enclosing_radius).prefix()]
    data = {
        "name": dom.name,
        "dimension": dom.dim,
        "defining_function": dom.field.prefix(),
        "enclosing_radius": float(dom.enclosing_radius),
        "regularity": dom.regularity,
        "witness_point": [[float(c.real), float(c.imag)] for c in dom.witness_point],
        "clip": clip,
        "constraints": extra,
        "pseudoconvex_known": bool(dom.pseudoconvex_known),
        "tubular_radius": float(dom.tubular_radius),
        "gradient_bound": float(dom.gradient_bound),
    }
    return yaml.safe_dump(data, sort_keys=False)


__all__ = [
    "SpecError",
    "domain_from_text",
    "domain_to_text",
    "load_domain",
    "load_map",
    "map_from_text",
    "parse_complex_vector",
]
