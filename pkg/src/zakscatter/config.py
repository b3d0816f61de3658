"""Run-configuration files (INI syntax) and their snapshots.

Example::

    [grid]
    L = 3
    Ktilde = 2
    P = 8

    [cover]
    boxes = 0 0, 1 2, 2 2

    [model]
    id = C1

    [weights]
    mode = fiducial_file

    [experiment]
    J = 256
    master_seed = 0

    [output]
    directory = out

Every key except ``grid.L`` has a default. Unknown sections or keys are
fatal and reported with their line number.
"""

import configparser
import dataclasses
import re
from pathlib import Path
from typing import Dict, Optional, Tuple

from .channel import GridSpec, build_cover, full_cover
from .errors import AliasingViolation, FiducialError, ParseError, ValidationError, ZakScatterError
from .fiducials import load_fiducial
from .harness import DRAW_KINDS, WEIGHT_MODES, ExperimentConfig, WeightSpec
from .models import MODELS, make_model

_SECTION_KEYS = {
    "grid": {"L", "Ktilde", "P"},
    "cover": {"boxes"},
    "model": None,  # depends on the model id
    "weights": {"mode", "file", "values", "seed"},
    "experiment": {"J", "J_sweep", "master_seed", "draw"},
    "output": {"directory"},
}

_MODEL_KEYS = {mid: {f.name for f in dataclasses.fields(cls)} for mid, cls in MODELS.items()}
_MODEL_KEYS["zero"] = {"t_max", "b_max"}

DEFAULT_KTILDE = 2
DEFAULT_P = 8


def _line_index(text: str) -> Dict[Tuple[Optional[str], Optional[str]], int]:
    """Map ``(section, key)`` (and ``(section, None)``) to 1-based line numbers."""
    index = {}
    section = None
    for n, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line[0] in "#;":
            continue
        m = re.match(r"\[([^\]]+)\]$", line)
        if m:
            section = m.group(1).strip()
            index.setdefault((section, None), n)
            continue
        m = re.match(r"([^=:]+?)\s*[=:]", line)
        if m:
            index.setdefault((section, m.group(1).strip()), n)
    return index


class _Reader:
    def __init__(self, parser, index):
        self.parser = parser
        self.index = index

    def line(self, section, key=None):
        return self.index.get((section, key))

    def get(self, section, key, default=None):
        if self.parser.has_option(section, key):
            return self.parser.get(section, key).strip()
        return default

    def number(self, section, key, kind, default=None):
        raw = self.get(section, key)
        if raw is None:
            return default
        try:
            return kind(raw)
        except ValueError:
            raise ParseError(f"[{section}] {key}: expected {kind.__name__}, got {raw!r}",
                             self.line(section, key)) from None


def _parse_pairs(raw: str, kind, what: str):
    pairs = []
    for chunk in re.split(r"[,;]", raw):
        chunk = chunk.strip()
        if not chunk:
            continue
        parts = chunk.split()
        if len(parts) != 2:
            raise ValueError(f"{what}: expected pairs like '1 2', got {chunk!r}")
        pairs.append((kind(parts[0]), kind(parts[1])))
    return pairs


def parse_config_text(text: str, base_dir: Path = Path(".")) -> ExperimentConfig:
    index = _line_index(text)
    parser = configparser.ConfigParser(interpolation=None, strict=True,
                                       default_section="__no_defaults__")
    parser.optionxform = str
    try:
        parser.read_string(text)
    except configparser.DuplicateOptionError as exc:
        raise ParseError(f"duplicate key {exc.option!r} in [{exc.section}]", exc.lineno) from None
    except configparser.DuplicateSectionError as exc:
        raise ParseError(f"duplicate section [{exc.section}]", exc.lineno) from None
    except configparser.MissingSectionHeaderError as exc:
        raise ParseError("key outside of any section", exc.lineno) from None
    except configparser.ParsingError as exc:
        lineno = exc.errors[0][0] if getattr(exc, "errors", None) else None
        raise ParseError("malformed line", lineno) from None
    r = _Reader(parser, index)

    for section in parser.sections():
        if section not in _SECTION_KEYS:
            raise ParseError(f"unknown section [{section}]", r.line(section))
    model_id = r.get("model", "id", "C1")
    if model_id not in _MODEL_KEYS:
        raise ParseError(f"unknown model id {model_id!r}", r.line("model", "id"))
    for section in parser.sections():
        allowed = _SECTION_KEYS[section] or (_MODEL_KEYS[model_id] | {"id"})
        for key in parser.options(section):
            if key not in allowed:
                raise ParseError(f"unknown key {key!r} in [{section}]", r.line(section, key))

    if not parser.has_option("grid", "L"):
        raise ParseError("[grid] L is required", r.line("grid"))
    try:
        grid = GridSpec(r.number("grid", "L", int), r.number("grid", "Ktilde", int, DEFAULT_KTILDE),
                        r.number("grid", "P", int, DEFAULT_P))
    except ValueError as exc:
        raise ValidationError(str(exc)) from None

    boxes_raw = r.get("cover", "boxes", "full")
    try:
        if boxes_raw == "full":
            cover = full_cover(grid.L)
        else:
            cover = build_cover(_parse_pairs(boxes_raw, int, "boxes"), grid.L)
    except AliasingViolation as exc:
        raise ValidationError(f"[cover] boxes (line {r.line('cover', 'boxes')}): {exc}") from None
    except ValueError as exc:
        raise ParseError(f"[cover] {exc}", r.line("cover", "boxes")) from None

    model = _parse_model(r, model_id)
    weights = _parse_weights(r, grid, base_dir)

    sweep_raw = r.get("experiment", "J_sweep")
    sweep = None
    if sweep_raw is not None:
        try:
            sweep = tuple(int(v) for v in re.split(r"[,\s]+", sweep_raw) if v)
        except ValueError:
            raise ParseError(f"[experiment] J_sweep: expected integers, got {sweep_raw!r}",
                             r.line("experiment", "J_sweep")) from None
    draw = r.get("experiment", "draw", "gaussian")
    if draw not in DRAW_KINDS:
        raise ParseError(f"[experiment] draw must be one of {DRAW_KINDS}", r.line("experiment", "draw"))
    try:
        return ExperimentConfig(
            grid=grid,
            cover=cover,
            model=model,
            weights=weights,
            J=r.number("experiment", "J", int, 16),
            master_seed=r.number("experiment", "master_seed", int, 0),
            J_sweep=sweep,
            draw=draw,
            output_dir=r.get("output", "directory"),
        )
    except ZakScatterError:
        raise
    except ValueError as exc:
        raise ValidationError(str(exc)) from None


def _parse_model(r: _Reader, model_id: str):
    cls = MODELS.get(model_id)
    fields = {f.name: f for f in dataclasses.fields(cls)} if cls else {}
    params = {}
    for key in r.parser.options("model") if r.parser.has_section("model") else []:
        if key == "id":
            continue
        raw = r.get("model", key)
        default = fields[key].default if key in fields else 0.0
        try:
            if isinstance(default, tuple):
                vals = tuple(float(v) for v in raw.replace(",", " ").split())
                if len(vals) != len(default):
                    raise ValueError
                params[key] = vals
            elif isinstance(default, int) and not isinstance(default, bool):
                params[key] = int(raw)
            else:
                params[key] = float(raw)
        except ValueError:
            raise ParseError(f"[model] {key}: bad value {raw!r}", r.line("model", key)) from None
    try:
        return make_model(model_id, **params)
    except (TypeError, ValueError) as exc:
        raise ValidationError(f"[model] {exc}") from None


def _parse_weights(r: _Reader, grid: GridSpec, base_dir: Path) -> WeightSpec:
    mode = r.get("weights", "mode", "fiducial_file")
    if mode not in WEIGHT_MODES:
        raise ParseError(f"[weights] mode must be one of {WEIGHT_MODES}", r.line("weights", "mode"))
    file = r.get("weights", "file")
    values = None
    raw = r.get("weights", "values")
    if raw is not None:
        try:
            values = tuple(complex(a, b) for a, b in _parse_pairs(raw, float, "values"))
        except ValueError as exc:
            raise ParseError(f"[weights] {exc}", r.line("weights", "values")) from None
    if mode == "fiducial_file" and file is not None:
        path = Path(file)
        if not path.is_absolute():
            path = (base_dir / path).resolve()
        file = str(path)
        try:
            c = load_fiducial(path)
        except FiducialError as exc:
            raise ValidationError(f"[weights] file (line {r.line('weights', 'file')}): {exc}") from None
        if c.size != grid.L:
            raise ValidationError(f"[weights] fiducial has L={c.size}, grid has L={grid.L}")
    if mode == "explicit" and (values is None or len(values) != grid.L):
        raise ValidationError(f"[weights] explicit mode needs {grid.L} values")
    return WeightSpec(mode=mode, file=file, values=values,
                      seed=r.number("weights", "seed", int))


def parse_config(path) -> ExperimentConfig:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ParseError(f"cannot read {path}: {exc}") from None
    return parse_config_text(text, base_dir=path.parent)


def _fmt(value) -> str:
    if isinstance(value, tuple):
        return " ".join(_fmt(v) for v in value)
    if isinstance(value, float):
        return repr(value)
    return str(value)


def dump_config(cfg: ExperimentConfig) -> str:
    """Fully specified configuration text; ``parse_config_text`` inverts it."""
    out = ["[grid]", f"L = {cfg.grid.L}", f"Ktilde = {cfg.grid.Ktilde}", f"P = {cfg.grid.P}", ""]
    out += ["[cover]", "boxes = " + ", ".join(f"{a} {b}" for a, b in cfg.cover.boxes), ""]
    out += ["[model]", f"id = {cfg.model.model_id}"]
    out += [f"{k} = {_fmt(v)}" for k, v in cfg.model.params().items()]
    out += ["", "[weights]", f"mode = {cfg.weights.mode}"]
    if cfg.weights.file is not None:
        out.append(f"file = {cfg.weights.file}")
    if cfg.weights.values is not None:
        out.append("values = " + ", ".join(f"{v.real!r} {v.imag!r}" for v in cfg.weights.values))
    if cfg.weights.seed is not None:
        out.append(f"seed = {cfg.weights.seed}")
    out += ["", "[experiment]", f"J = {cfg.J}", f"master_seed = {cfg.master_seed}", f"draw = {cfg.draw}"]
    if cfg.J_sweep is not None:
        out.append("J_sweep = " + ", ".join(str(j) for j in cfg.J_sweep))
    if cfg.output_dir is not None:
        out += ["", "[output]", f"directory = {cfg.output_dir}"]
    return "\n".join(out) + "\n"
