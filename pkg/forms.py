"""Scenario forms: WTForms validation of JSON scenario files."""

import json
import logging
from dataclasses import dataclass, field
from fractions import Fraction

from wtforms import Field, FieldList, Form, FormField, IntegerField, StringField
from wtforms.validators import AnyOf, NumberRange, StopValidation, ValidationError

from commit import CommitParams, CommittableSet
from commit_opt import OptGeometry, OptParams, TickSchedule
from pv import PvInstance, place_verifiers
from spacetime import SpacetimePoint, rational

logger = logging.getLogger(__name__)

KINDS = ["pv", "commit", "opt", "zkpv"]


class ConfigError(ValueError):
    """A scenario failed validation; ``problems`` holds (json pointer, message) pairs."""

    def __init__(self, problems):
        self.problems = list(problems)
        super().__init__("; ".join(f"{ptr}: {msg}" for ptr, msg in self.problems))


def required(form, field):
    """Present in the document (zero counts)."""

    if field.data is None or field.data == "":
        if field.process_errors:
            raise StopValidation()
        raise StopValidation("This field is required.")


def add_error(field, message):
    field.errors = [*field.errors, message]


def optional(form, field):
    """Skip the remaining validators when the value is absent.

    Values that failed to parse keep their processing error.
    """

    if field.data is None:
        raise StopValidation()


class RationalField(Field):
    """Exact rational: an int, a decimal string or "p/q"."""

    def process_data(self, value):
        if value is None:
            self.data = None
            return
        try:
            self.data = rational(value)
        except (ValueError, TypeError, ZeroDivisionError) as exc:
            self.data = None
            raise ValueError("Not a rational number.") from exc

    def _value(self):
        return "" if self.data is None else str(self.data)


class PointForm(Form):
    """Spacetime point {"L": [...], "t": ...}."""

    L = FieldList(RationalField(validators=[required]))
    t = RationalField(validators=[optional])

    def validate(self, extra_validators=None):
        if not self.L.entries and self.t.data is None and not self.t.process_errors:
            return True
        ok = super().validate(extra_validators)
        if self.t.data is None and not self.t.errors:
            add_error(self.t, "This field is required.")
            ok = False
        return ok

    def validate_L(self, field):
        if not 1 <= len(field.entries) <= 3:
            raise ValidationError("Points have one to three coordinates.")


class ParamsForm(Form):
    """Protocol parameters, all optional with protocol defaults."""

    n = IntegerField(validators=[optional, NumberRange(min=1, max=64)])
    r = IntegerField(validators=[optional, NumberRange(min=1, max=1000)])
    kappa = IntegerField(validators=[optional, NumberRange(min=1, max=64)])
    lam = IntegerField(validators=[optional, NumberRange(min=1, max=32)])
    reps = IntegerField(validators=[optional, NumberRange(min=1, max=1000)])
    delta = RationalField(validators=[optional])
    ticks = IntegerField(validators=[optional, NumberRange(min=1, max=100000)])
    t_start = RationalField(validators=[optional])


class ScenarioForm(Form):
    """Form for one scenario document."""

    name = StringField(validators=[required])
    kind = StringField(validators=[required, AnyOf(KINDS)])
    seed = IntegerField(validators=[required, NumberRange(min=0)])
    margin = RationalField(validators=[optional])
    verifiers = FieldList(FieldList(RationalField(validators=[required])))
    target = FormField(PointForm)
    S = FieldList(FormField(PointForm))
    R = FieldList(FormField(PointForm))
    alpha = IntegerField(validators=[optional, NumberRange(min=0)])
    zone = FieldList(IntegerField(validators=[required, NumberRange(min=0)]))
    params = FormField(ParamsForm)

    def _points(self, name):
        return [entry.form for entry in getattr(self, name).entries]

    def _dimension(self):
        if self.kind.data == "pv" and self.target.L.entries:
            return len(self.target.L.entries)
        points = self._points("S")
        return len(points[0].L.entries) if points else None

    def validate_margin(self, field):
        if field.data is not None and field.data <= 0:
            raise ValidationError("Margin must be positive.")

    def validate_verifiers(self, field):
        d = self._dimension()
        if not field.entries or d is None:
            return
        if len(field.entries) != d + 1:
            raise ValidationError(f"{d}-d scenarios need {d + 1} verifiers.")
        if any(len(v.entries) != d for v in field.entries):
            raise ValidationError(f"Every verifier needs {d} coordinates.")

    def validate_S(self, field):
        d = self._dimension()
        if self.kind.data in ("commit", "zkpv") and not field.entries:
            raise ValidationError("This scenario needs a committable set.")
        if any(not p.L.entries for p in self._points("S")):
            raise ValidationError("Every point of S needs coordinates.")
        if any(len(p.L.entries) != d for p in self._points("S")):
            raise ValidationError("Points of S have mixed dimensions.")

    def validate_R(self, field):
        if self.kind.data == "zkpv" and not field.entries:
            raise ValidationError("ZK position verification needs a region.")
        S = {_point_key(p) for p in self._points("S")}
        for p in self._points("R"):
            if _point_key(p) not in S:
                raise ValidationError("R must be a subset of S.")

    def validate_alpha(self, field):
        if field.data is not None and self.S.entries and field.data >= len(self.S.entries):
            raise ValidationError("alpha is not an index of S.")

    def validate(self, extra_validators=None):
        ok = super().validate(extra_validators)
        if self.kind.data == "pv" and not self.target.form.L.entries:
            add_error(self.target.form.L, "Position verification needs a target point.")
            ok = False
        params = self.params.form
        if self.kind.data == "opt":
            for name in ("delta", "ticks"):
                if getattr(params, name).data is None and not getattr(params, name).errors:
                    add_error(getattr(params, name), "The optimized scheme needs this field.")
                    ok = False
            if params.delta.data is not None and params.delta.data <= 0:
                add_error(params.delta, "delta must be positive.")
                ok = False
        return ok


def _point_key(form):
    return (tuple(e.data for e in form.L.entries), form.t.data)


def flatten_errors(errors, pointer=""):
    """(json pointer, message) pairs from a nested WTForms errors structure."""

    if isinstance(errors, dict):
        for key in sorted(errors, key=str):
            yield from flatten_errors(errors[key], pointer if key is None else f"{pointer}/{key}")
    elif isinstance(errors, (list, tuple)):
        for i, item in enumerate(errors):
            if isinstance(item, str):
                yield (pointer or "/", item)
            else:
                yield from flatten_errors(item, f"{pointer}/{i}")


def _point(data):
    return SpacetimePoint(tuple(data["L"]), data["t"])


def _rational_text(value):
    return str(value)


@dataclass(frozen=True)
class ScenarioConfig:
    """A validated scenario."""

    name: str
    kind: str
    seed: int
    S: tuple = ()
    R: tuple = ()
    target: SpacetimePoint = None
    verifiers: tuple = None
    margin: Fraction = Fraction(1)
    alpha: int = None
    zone: tuple = ()
    params: dict = field(default_factory=dict)

    @classmethod
    def from_form(cls, form):
        data = form.data
        params = {k: v for k, v in data["params"].items() if v is not None}
        target = data["target"]
        return cls(
            name=data["name"],
            kind=data["kind"],
            seed=data["seed"],
            S=tuple(_point(p) for p in data["S"]),
            R=tuple(_point(p) for p in data["R"]),
            target=_point(target) if target and target["L"] else None,
            verifiers=tuple(tuple(v) for v in data["verifiers"]) or None,
            margin=data["margin"] if data["margin"] is not None else Fraction(1),
            alpha=data["alpha"],
            zone=tuple(data["zone"]),
            params=params,
        )

    def to_dict(self):
        def point(p):
            return {"L": [_rational_text(c) for c in p.L], "t": _rational_text(p.t)}

        out = {"name": self.name, "kind": self.kind, "seed": self.seed,
               "margin": _rational_text(self.margin)}
        if self.S:
            out["S"] = [point(p) for p in self.S]
        if self.R:
            out["R"] = [point(p) for p in self.R]
        if self.target is not None:
            out["target"] = point(self.target)
        if self.verifiers is not None:
            out["verifiers"] = [[_rational_text(c) for c in v] for v in self.verifiers]
        if self.alpha is not None:
            out["alpha"] = self.alpha
        if self.zone:
            out["zone"] = list(self.zone)
        if self.params:
            out["params"] = {
                k: (_rational_text(v) if isinstance(v, Fraction) else v)
                for k, v in sorted(self.params.items())
            }
        return out

    def to_json(self):
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"

    # builders

    def placed_verifiers(self):
        if self.verifiers is not None:
            return self.verifiers
        points = [p.L for p in self.S]
        if self.target is not None:
            points.append(self.target.L)
        return tuple(place_verifiers(points, self.margin))

    def region_indices(self):
        return frozenset(self.S.index(p) for p in self.R)

    def pv_instance(self):
        p = self.params
        return PvInstance(self.placed_verifiers(), self.target, n=p.get("n", 8), r=p.get("r", 1))

    def commit_params(self):
        defaults = CommitParams()
        p = self.params
        return CommitParams(
            n=p.get("n", defaults.n), r=p.get("r", defaults.r),
            kappa=p.get("kappa", defaults.kappa), lam=p.get("lam", defaults.lam),
        )

    def committable_set(self):
        return CommittableSet(self.placed_verifiers(), self.S)

    def opt_params(self):
        defaults = OptParams()
        p = self.params
        return OptParams(n=p.get("n", defaults.n), kappa=p.get("kappa", defaults.kappa),
                         lam=p.get("lam", defaults.lam))

    def opt_geometry(self, ticks=None, delta=None):
        p = self.params
        schedule = TickSchedule.from_ticks(
            ticks or p["ticks"], delta or p["delta"], p.get("t_start", Fraction(0))
        )
        return OptGeometry(self.placed_verifiers(), schedule)


def parse_scenario(document):
    """Validate a decoded JSON document; raise ConfigError with pointers."""

    if not isinstance(document, dict):
        raise ConfigError([("/", "A scenario must be a JSON object.")])
    form = ScenarioForm(data=document)
    if not form.validate():
        problems = list(flatten_errors(form.errors))
        for ptr, msg in problems:
            logger.warning("scenario %s: %s", ptr, msg)
        raise ConfigError(problems)
    return ScenarioConfig.from_form(form)


def load_scenario(path):
    try:
        with open(path) as f:
            document = json.load(f)
    except json.JSONDecodeError as exc:
        raise ConfigError([("/", f"Invalid JSON: {exc.msg} (line {exc.lineno}).")]) from exc
    return parse_scenario(document)
