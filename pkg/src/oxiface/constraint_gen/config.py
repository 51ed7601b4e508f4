"""Generation options: heap allocators, external signature specs, bounds.

A signature spec constrains base types of an external (body-less) function's
parameters and return. Text form, one per line:

    llvm.memcpy.*: (<mut>, <any>) -> <mut>

Each angle-bracket group lists base specs positionally for one type's
fragments; `any` (or a missing position) leaves the fragment unconstrained.
A trailing `*` in the name is a wildcard.
"""
from __future__ import annotations

import fnmatch
import json
import re
from dataclasses import dataclass, field

BASE_SPECS = (
    "any",
    "unknown",
    "void",
    "bool",
    "i8",
    "i16",
    "i32",
    "i64",
    "f32",
    "f64",
    "ghost",
    "Box",
    "Rc",
    "shared",
    "mut",
)

DEFAULT_HEAP_FUNCTIONS = frozenset(
    {"malloc", "calloc", "valloc", "realloc", "aligned_alloc"}
)

DEFAULT_SIG_SPECS = (
    "llvm.memcpy.*: (<mut>,) -> <mut>",
    "llvm.memmove.*: (<mut>,) -> <mut>",
    "llvm.memset.*: (<mut>,) -> <mut>",
    "memcpy: (<mut>,) -> <mut>",
    "memmove: (<mut>,) -> <mut>",
    "memset: (<mut>,) -> <mut>",
)


@dataclass(frozen=True)
class SigSpec:
    pattern: str
    params: tuple[tuple[str, ...], ...]  # base spec per fragment, per param
    ret: tuple[str, ...]

    def matches(self, name: str) -> bool:
        return fnmatch.fnmatchcase(name, self.pattern)


_SPEC_RE = re.compile(r"^\s*(?P<name>[\w.*\-]+)\s*:\s*\((?P<params>.*)\)\s*->\s*(?P<ret>.*)$")
_GROUP_RE = re.compile(r"<([^<>]*)>")


def _parse_group(text: str, origin: str) -> tuple[str, ...]:
    parts = [p.strip() for p in text.split(",") if p.strip()]
    for p in parts:
        if p not in BASE_SPECS:
            raise ValueError(f"{origin}: unknown base spec {p!r}")
    return tuple(parts)


def parse_sig_spec(line: str) -> SigSpec:
    m = _SPEC_RE.match(line)
    if not m:
        raise ValueError(f"malformed signature spec: {line!r}")
    name = m.group("name")
    params = tuple(
        _parse_group(g, name) for g in _GROUP_RE.findall(m.group("params"))
    )
    ret_groups = _GROUP_RE.findall(m.group("ret"))
    if len(ret_groups) != 1:
        raise ValueError(f"{name}: expected exactly one return type spec")
    return SigSpec(name, params, _parse_group(ret_groups[0], name))


@dataclass
class Config:
    generics_bound: int = 2
    heap_functions: frozenset[str] = DEFAULT_HEAP_FUNCTIONS
    sig_specs: list[SigSpec] = field(
        default_factory=lambda: [parse_sig_spec(s) for s in DEFAULT_SIG_SPECS]
    )
    conservative_option: bool = True

    def specs_for(self, name: str) -> list[SigSpec]:
        return [s for s in self.sig_specs if s.matches(name)]


def load_config(path: str) -> Config:
    """Read options from a JSON file; missing keys keep their defaults."""
    with open(path) as f:
        data = json.load(f)
    cfg = Config()
    if "generics_bound" in data:
        cfg.generics_bound = int(data["generics_bound"])
    if "heap_functions" in data:
        cfg.heap_functions = frozenset(data["heap_functions"])
    if "externals" in data:
        specs = [parse_sig_spec(s) for s in data["externals"]]
        if data.get("replace_default_externals", False):
            cfg.sig_specs = specs
        else:
            cfg.sig_specs += specs
    if "conservative_option" in data:
        cfg.conservative_option = bool(data["conservative_option"])
    return cfg
