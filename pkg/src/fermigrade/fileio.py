"""Line-oriented text formats for states, mixtures, groups and operators.

State files are hand-writable and diff-friendly:

    # comment lines and blank lines are ignored
    basis 8
    state psi1
    1 [1 2 3]
    1 [4 5 6]
    end
    mixture m
    0.5 psi1
    0.5 psi2
    end
    group g = psi1 psi2

Complex coefficients are written ``a+bi``; the writer emits 17 significant
digits so a dump/parse round trip reproduces every coefficient bit for bit.

Operator files carry one rank line followed by coefficient lines:

    rank 1
    [1] [2] 0.5+0.25i

Missing Hermitian partners are filled in automatically; conflicting ones
are rejected.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field

from .density import MixedState
from .fock import OrbitalBasis, StateVector
from .groups import GroupProduct, QOperator


class ParseError(ValueError):
    """Input file error, carrying the 1-based line number."""

    def __init__(self, lineno: int, message: str):
        super().__init__(f"line {lineno}: {message}")
        self.lineno = lineno


_FLOAT = r"[+-]?(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?"
_FULL_RE = re.compile(rf"^(?P<re>{_FLOAT})(?P<im>[+-](?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)i$")
_IMAG_RE = re.compile(rf"^(?P<im>{_FLOAT})i$")
_OCC_RE = re.compile(r"\[([^\]]*)\]")


def parse_complex(token: str) -> complex:
    token = token.strip()
    m = _FULL_RE.match(token)
    if m:
        return complex(float(m.group("re")), float(m.group("im")))
    m = _IMAG_RE.match(token)
    if m:
        return complex(0.0, float(m.group("im")))
    try:
        return complex(float(token), 0.0)
    except ValueError:
        raise ValueError(f"cannot parse complex coefficient {token!r}") from None


def format_complex(z: complex) -> str:
    z = complex(z)
    if z.imag == 0.0:
        return f"{z.real:.17g}"
    if z.real == 0.0:
        return f"{z.imag:.17g}i"
    return f"{z.real:.17g}{z.imag:+.17g}i"


@dataclass
class StateFile:
    """Parsed contents of a state file."""

    basis: OrbitalBasis
    states: dict[str, StateVector] = field(default_factory=dict)
    mixtures: dict[str, MixedState] = field(default_factory=dict)
    groups: dict[str, GroupProduct] = field(default_factory=dict)

    def resolve_state(self, name: str) -> MixedState:
        if name in self.states:
            return MixedState.pure(self.states[name])
        if name in self.mixtures:
            return self.mixtures[name]
        raise KeyError(f"unknown state or mixture {name!r}")

    def resolve_group(self, name: str) -> GroupProduct:
        if name in self.groups:
            return self.groups[name]
        if name in self.states:
            return GroupProduct.of(self.states[name])
        raise KeyError(f"unknown group or state {name!r}")


def _parse_occupation(lineno: int, text: str, dim: int) -> tuple[int, ...]:
    try:
        occ = tuple(int(tok) for tok in text.split())
    except ValueError:
        raise ParseError(lineno, f"bad occupation {text!r}") from None
    if not occ:
        raise ParseError(lineno, "empty occupation")
    if any(a >= b for a, b in zip(occ, occ[1:])):
        raise ParseError(lineno, f"occupation {occ} is not strictly increasing")
    if occ[0] < 1 or occ[-1] > dim:
        raise ParseError(lineno, f"occupation {occ} outside 1..{dim}")
    return occ


def parse_state_file(text: str) -> StateFile:
    lines = text.splitlines()
    basis: OrbitalBasis | None = None
    out: StateFile | None = None
    block: str | None = None  # "state" or "mixture"
    block_name = ""
    block_start = 0
    state_terms: dict[tuple[int, ...], complex] = {}
    mix_parts: list[tuple[float, str]] = []

    def known(name_: str) -> bool:
        return out is not None and (name_ in out.states or name_ in out.mixtures or name_ in out.groups)

    for lineno, raw in enumerate(lines, start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        words = line.split()
        if basis is None:
            if words[0] != "basis" or len(words) != 2:
                raise ParseError(lineno, "expected 'basis <dim>' before any other content")
            try:
                basis = OrbitalBasis(int(words[1]))
            except ValueError as exc:
                raise ParseError(lineno, str(exc)) from None
            out = StateFile(basis)
            continue
        assert out is not None

        if block == "state":
            if line == "end":
                if not state_terms:
                    raise ParseError(block_start, f"state {block_name!r} has no terms")
                try:
                    out.states[block_name] = StateVector.from_occupations(basis, state_terms)
                except ValueError as exc:
                    raise ParseError(block_start, str(exc)) from None
                block = None
                continue
            m = _OCC_RE.search(line)
            if m is None:
                raise ParseError(lineno, "expected '<coeff> [i j k]'")
            occ = _parse_occupation(lineno, m.group(1), basis.dim)
            try:
                coeff = parse_complex(line[: m.start()].strip())
            except ValueError as exc:
                raise ParseError(lineno, str(exc)) from None
            if occ in state_terms:
                raise ParseError(lineno, f"duplicate occupation {occ} in state {block_name!r}")
            state_terms[occ] = coeff
            continue

        if block == "mixture":
            if line == "end":
                comps = []
                for w, sname in mix_parts:
                    if sname not in out.states:
                        raise ParseError(block_start, f"mixture {block_name!r} references unknown state {sname!r}")
                    comps.append((w, out.states[sname]))
                total = sum(w for w, _ in comps)
                if abs(total - 1.0) > 1e-9:
                    raise ParseError(block_start, f"mixture {block_name!r} weights do not sum to 1")
                try:
                    out.mixtures[block_name] = MixedState.mix([(w / total, s) for w, s in comps])
                except ValueError as exc:
                    raise ParseError(block_start, str(exc)) from None
                block = None
                continue
            if len(words) != 2:
                raise ParseError(lineno, "expected '<weight> <state-name>'")
            try:
                weight = float(words[0])
            except ValueError:
                raise ParseError(lineno, f"bad weight {words[0]!r}") from None
            mix_parts.append((weight, words[1]))
            continue

        if words[0] == "state":
            if len(words) != 2:
                raise ParseError(lineno, "expected 'state <name>'")
            if known(words[1]):
                raise ParseError(lineno, f"duplicate name {words[1]!r}")
            block, block_name, block_start = "state", words[1], lineno
            state_terms = {}
            continue
        if words[0] == "mixture":
            if len(words) != 2:
                raise ParseError(lineno, "expected 'mixture <name>'")
            if known(words[1]):
                raise ParseError(lineno, f"duplicate name {words[1]!r}")
            block, block_name, block_start = "mixture", words[1], lineno
            mix_parts = []
            continue
        if words[0] == "group":
            if len(words) < 4 or words[2] != "=":
                raise ParseError(lineno, "expected 'group <name> = s1 s2 ...'")
            gname = words[1]
            if known(gname):
                raise ParseError(lineno, f"duplicate name {gname!r}")
            factors = []
            for sname in words[3:]:
                if sname not in out.states:
                    raise ParseError(lineno, f"group {gname!r} references unknown state {sname!r}")
                factors.append(out.states[sname])
            try:
                out.groups[gname] = GroupProduct(tuple(factors))
            except ValueError as exc:
                raise ParseError(lineno, str(exc)) from None
            continue
        raise ParseError(lineno, f"unrecognized directive {words[0]!r}")

    if basis is None:
        raise ParseError(1, "empty file: expected 'basis <dim>'")
    if block is not None:
        raise ParseError(block_start, f"{block} {block_name!r} not closed with 'end'")
    return out


def dump_state_file(sf: StateFile) -> str:
    lines = [f"basis {sf.basis.dim}"]
    for name, psi in sf.states.items():
        lines.append(f"state {name}")
        for occ, c in psi.occupations().items():
            lines.append(f"{format_complex(c)} [{' '.join(str(i) for i in occ)}]")
        lines.append("end")
    for name, mix in sf.mixtures.items():
        lines.append(f"mixture {name}")
        for w, psi in mix.components:
            sname = next(k for k, v in sf.states.items() if v == psi or (v.normalized() == psi))
            lines.append(f"{w:.17g} {sname}")
        lines.append("end")
    for name, grp in sf.groups.items():
        names = []
        for f in grp.factors:
            names.append(next(k for k, v in sf.states.items() if v == f))
        lines.append(f"group {name} = {' '.join(names)}")
    return "\n".join(lines) + "\n"


def parse_operator_file(text: str, basis: OrbitalBasis) -> QOperator:
    rank: int | None = None
    terms: dict[tuple[tuple[int, ...], tuple[int, ...]], complex] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        words = line.split()
        if rank is None:
            if words[0] != "rank" or len(words) != 2:
                raise ParseError(lineno, "expected 'rank <q>' before coefficient lines")
            try:
                rank = int(words[1])
            except ValueError:
                raise ParseError(lineno, f"bad rank {words[1]!r}") from None
            if rank < 1:
                raise ParseError(lineno, f"rank must be >= 1, got {rank}")
            continue
        groups = _OCC_RE.findall(line)
        if len(groups) != 2:
            raise ParseError(lineno, "expected '[i ...] [j ...] <coeff>'")
        tail = _OCC_RE.sub("", line, count=2).strip()
        try:
            i_tup = tuple(int(t) for t in groups[0].split())
            j_tup = tuple(int(t) for t in groups[1].split())
            lam = parse_complex(tail)
        except ValueError as exc:
            raise ParseError(lineno, str(exc)) from None
        if (i_tup, j_tup) in terms:
            raise ParseError(lineno, f"duplicate operator entry {(i_tup, j_tup)}")
        terms[(i_tup, j_tup)] = lam
    if rank is None:
        raise ParseError(1, "empty operator file: expected 'rank <q>'")
    try:
        return QOperator(basis, rank, terms)
    except ValueError as exc:
        raise ParseError(1, str(exc)) from None
