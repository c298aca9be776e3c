"""Query AST and its canonical serializer.

``parse(render(ast))`` reproduces the AST exactly; literals are always
rendered quoted, keywords upper-case, patterns joined with " . ".
"""

from dataclasses import dataclass
from typing import Optional, Union


@dataclass(frozen=True)
class Var:
    name: str


@dataclass(frozen=True)
class EntityRef:
    id: str


@dataclass(frozen=True)
class PredicateRef:
    id: str


@dataclass(frozen=True)
class Literal:
    value: str


Term = Union[Var, EntityRef, PredicateRef, Literal]


@dataclass(frozen=True)
class TriplePattern:
    subject: Term
    predicate: Term
    object: Term

    def variables(self) -> set[str]:
        return {t.name for t in (self.subject, self.predicate, self.object)
                if isinstance(t, Var)}


@dataclass(frozen=True)
class QueryAst:
    form: str  # "select" | "ask" | "count"
    patterns: tuple[TriplePattern, ...]
    projection: tuple[str, ...] = ()  # select: projected variable names
    distinct: bool = False
    limit: Optional[int] = None
    count_var: Optional[str] = None  # count form only
    count_alias: Optional[str] = None
    count_distinct: bool = False

    def pattern_variables(self) -> set[str]:
        names: set[str] = set()
        for p in self.patterns:
            names |= p.variables()
        return names


def _render_term(term: Term) -> str:
    if isinstance(term, Var):
        return f"?{term.name}"
    if isinstance(term, EntityRef):
        return f"wd:{term.id}"
    if isinstance(term, PredicateRef):
        return f"wdt:{term.id}"
    escaped = term.value.replace("\\", "\\\\").replace('"', '\\"')
    return f'"{escaped}"'


def render(ast: QueryAst) -> str:
    """Canonical query text for an AST."""
    body = " . ".join(
        f"{_render_term(p.subject)} {_render_term(p.predicate)} {_render_term(p.object)}"
        for p in ast.patterns
    )
    group = "{ " + body + " }" if body else "{ }"
    if ast.form == "ask":
        return f"ASK {group}"
    if ast.form == "count":
        inner = f"DISTINCT ?{ast.count_var}" if ast.count_distinct else f"?{ast.count_var}"
        head = f"SELECT (COUNT({inner}) AS ?{ast.count_alias})"
    else:
        vars_part = " ".join(f"?{v}" for v in ast.projection)
        head = "SELECT DISTINCT " + vars_part if ast.distinct else "SELECT " + vars_part
    text = f"{head} WHERE {group}"
    if ast.limit is not None:
        text += f" LIMIT {ast.limit}"
    return text
