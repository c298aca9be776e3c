"""Tokenizer and recursive-descent parser for the restricted grammar.

Errors carry the first offending token and its byte offset. Recognized
SPARQL features outside the subset (FILTER, OPTIONAL, UNION, property
paths, qualifier namespaces, aggregates other than COUNT, full IRIs)
raise kind="unsupported-construct"; malformed input raises
kind="syntax-error".
"""

import re
from typing import NamedTuple, Optional

from kgqa.errors import QueryParseError
from kgqa.ids import is_entity_id, is_predicate_id
from kgqa.sparql.ast import EntityRef, Literal, PredicateRef, QueryAst, TriplePattern, Var

_TOKEN_RE = re.compile(
    r"""
    (?P<ws>\s+|\#[^\n]*)
  | (?P<var>\?[A-Za-z_][A-Za-z0-9_]*)
  | (?P<pname>[A-Za-z][A-Za-z0-9_\-]*:[A-Za-z0-9_.\-]*)
  | (?P<word>[A-Za-z][A-Za-z0-9_]*)
  | (?P<iri><[^<>\s]*>)
  | (?P<string>"(?:[^"\\]|\\.)*"|'(?:[^'\\]|\\.)*')
  | (?P<number>-?[0-9]+(?:\.[0-9]+)?)
  | (?P<punct>[{}().;,/|^*+<>=!&\-])
    """,
    re.VERBOSE,
)

_UNSUPPORTED_KEYWORDS = {
    "FILTER", "OPTIONAL", "UNION", "MINUS", "SERVICE", "BIND", "VALUES",
    "GRAPH", "ORDER", "GROUP", "HAVING", "OFFSET", "CONSTRUCT", "DESCRIBE",
    "INSERT", "DELETE", "EXISTS", "SUM", "AVG", "MIN", "MAX", "SAMPLE",
    "GROUP_CONCAT", "REDUCED",
}

_PATH_OPERATORS = {"/", "|", "^", "*", "+"}


class _Token(NamedTuple):
    kind: str
    text: str
    pos: int  # character offset into the query text


def _byte_offset(text: str, pos: int) -> int:
    return len(text[:pos].encode("utf-8"))


def _tokenize(text: str) -> list[_Token]:
    tokens = []
    pos = 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            raise QueryParseError(
                f"unexpected character {text[pos]!r}",
                kind="syntax-error", offset=_byte_offset(text, pos),
            )
        if m.lastgroup != "ws":
            tokens.append(_Token(m.lastgroup, m.group(), pos))
        pos = m.end()
    return tokens


def _unescape(raw: str) -> str:
    body = raw[1:-1]
    return re.sub(r"\\(.)", lambda m: m.group(1), body)


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.tokens = _tokenize(text)
        self.i = 0

    def _fail(self, message, kind="syntax-error", token: Optional[_Token] = None):
        token = token if token is not None else self.peek()
        offset = _byte_offset(self.text, token.pos) if token else len(self.text.encode("utf-8"))
        raise QueryParseError(message, kind=kind, offset=offset)

    def peek(self) -> Optional[_Token]:
        return self.tokens[self.i] if self.i < len(self.tokens) else None

    def next(self) -> _Token:
        tok = self.peek()
        if tok is None:
            raise QueryParseError("unexpected end of query", kind="syntax-error",
                                  offset=len(self.text.encode("utf-8")))
        self.i += 1
        return tok

    def at_keyword(self, word: str) -> bool:
        tok = self.peek()
        return tok is not None and tok.kind == "word" and tok.text.upper() == word

    def expect_punct(self, char: str) -> _Token:
        tok = self.peek()
        if tok is None or tok.kind != "punct" or tok.text != char:
            got = tok.text if tok else "end of query"
            self._fail(f"expected {char!r}, got {got!r}")
        return self.next()

    # --- grammar ---

    def parse(self) -> QueryAst:
        while self.at_keyword("PREFIX"):
            self.next()
            name = self.next()
            if name.kind != "pname":
                self._fail(f"expected a prefix name after PREFIX, got {name.text!r}",
                           token=name)
            iri = self.next()
            if iri.kind != "iri":
                self._fail(f"expected an IRI after prefix {name.text!r}", token=iri)
        tok = self.peek()
        if tok is None:
            self._fail("empty query")
        if tok.kind == "word":
            word = tok.text.upper()
            if word == "SELECT":
                ast = self._select()
            elif word == "ASK":
                ast = self._ask()
            elif word in _UNSUPPORTED_KEYWORDS:
                self._fail(f"{word} queries are not supported",
                           kind="unsupported-construct")
            else:
                self._fail(f"expected SELECT or ASK, got {tok.text!r}")
        else:
            self._fail(f"expected SELECT or ASK, got {tok.text!r}")
        if self.peek() is not None:
            extra = self.peek()
            if extra.kind == "word" and extra.text.upper() in _UNSUPPORTED_KEYWORDS:
                self._fail(f"{extra.text.upper()} is not supported",
                           kind="unsupported-construct", token=extra)
            self._fail(f"unexpected trailing token {extra.text!r}", token=extra)
        self._validate(ast)
        return ast

    def _select(self) -> QueryAst:
        self.next()  # SELECT
        distinct = False
        if self.at_keyword("DISTINCT"):
            self.next()
            distinct = True
        tok = self.peek()
        if tok is not None and tok.kind == "punct" and tok.text == "(":
            count_var, count_alias, count_distinct = self._count_clause()
            patterns = self._where_block()
            limit = self._limit()
            # Outer DISTINCT over a single aggregate row is a no-op; drop it
            # so the canonical rendering is a parse fixed point.
            return QueryAst(form="count", patterns=patterns, count_var=count_var,
                            count_alias=count_alias, count_distinct=count_distinct,
                            limit=limit)
        projection = []
        while True:
            tok = self.peek()
            if tok is not None and tok.kind == "var":
                projection.append(self.next().text[1:])
            else:
                break
        if not projection:
            got = tok.text if tok else "end of query"
            if tok is not None and tok.kind == "word" and tok.text.upper() in _UNSUPPORTED_KEYWORDS:
                self._fail(f"{tok.text.upper()} is not supported",
                           kind="unsupported-construct")
            if tok is not None and tok.kind == "punct" and tok.text == "*":
                self._fail("SELECT * is not supported", kind="unsupported-construct")
            self._fail(f"expected projected variables, got {got!r}")
        patterns = self._where_block()
        limit = self._limit()
        return QueryAst(form="select", patterns=patterns,
                        projection=tuple(projection), distinct=distinct, limit=limit)

    def _count_clause(self):
        self.expect_punct("(")
        tok = self.next()
        if tok.kind != "word" or tok.text.upper() != "COUNT":
            if tok.kind == "word" and tok.text.upper() in _UNSUPPORTED_KEYWORDS:
                self._fail(f"aggregate {tok.text.upper()} is not supported",
                           kind="unsupported-construct", token=tok)
            self._fail(f"expected COUNT, got {tok.text!r}", token=tok)
        self.expect_punct("(")
        count_distinct = False
        if self.at_keyword("DISTINCT"):
            self.next()
            count_distinct = True
        var = self.next()
        if var.kind != "var":
            self._fail(f"expected a variable inside COUNT, got {var.text!r}", token=var)
        self.expect_punct(")")
        as_tok = self.next()
        if as_tok.kind != "word" or as_tok.text.upper() != "AS":
            self._fail(f"expected AS, got {as_tok.text!r}", token=as_tok)
        alias = self.next()
        if alias.kind != "var":
            self._fail(f"expected an alias variable after AS, got {alias.text!r}",
                       token=alias)
        self.expect_punct(")")
        return var.text[1:], alias.text[1:], count_distinct

    def _ask(self) -> QueryAst:
        self.next()  # ASK
        patterns = self._where_block()
        return QueryAst(form="ask", patterns=patterns)

    def _where_block(self) -> tuple[TriplePattern, ...]:
        if self.at_keyword("WHERE"):
            self.next()
        self.expect_punct("{")
        patterns = [self._pattern()]
        while True:
            tok = self.peek()
            if tok is None:
                self._fail("unterminated group: expected '}'")
            if tok.kind == "punct" and tok.text == "}":
                self.next()
                break
            if tok.kind == "punct" and tok.text == ".":
                self.next()
                nxt = self.peek()
                if nxt is not None and nxt.kind == "punct" and nxt.text == "}":
                    self.next()
                    break
                patterns.append(self._pattern())
                continue
            if tok.kind == "punct" and tok.text in (";", ","):
                self._fail("predicate-object lists are not supported",
                           kind="unsupported-construct", token=tok)
            if tok.kind == "word" and tok.text.upper() in _UNSUPPORTED_KEYWORDS:
                self._fail(f"{tok.text.upper()} is not supported",
                           kind="unsupported-construct", token=tok)
            self._fail(f"expected '.' or '}}', got {tok.text!r}", token=tok)
        return tuple(patterns)

    def _pattern(self) -> TriplePattern:
        subject = self._term("subject")
        predicate = self._term("predicate")
        nxt = self.peek()
        if nxt is not None and nxt.kind == "punct" and nxt.text in _PATH_OPERATORS:
            self._fail("property paths are not supported",
                       kind="unsupported-construct", token=nxt)
        obj = self._term("object")
        return TriplePattern(subject, predicate, obj)

    def _term(self, position: str):
        tok = self.next()
        if tok.kind == "punct" and tok.text == "{":
            self._fail("nested group patterns are not supported",
                       kind="unsupported-construct", token=tok)
        if tok.kind == "var":
            return Var(tok.text[1:])
        if tok.kind == "pname":
            prefix, _, local = tok.text.partition(":")
            if prefix == "wd":
                if not is_entity_id(local):
                    self._fail(f"wd: must name an entity id, got {tok.text!r}", token=tok)
                if position == "predicate":
                    self._fail("entity reference cannot be a predicate", token=tok)
                return EntityRef(local)
            if prefix == "wdt":
                if not is_predicate_id(local):
                    self._fail(f"wdt: must name a predicate id, got {tok.text!r}",
                               token=tok)
                if position != "predicate":
                    self._fail(f"predicate reference cannot be a {position}", token=tok)
                return PredicateRef(local)
            self._fail(f"namespace {prefix!r} is not supported",
                       kind="unsupported-construct", token=tok)
        if tok.kind == "string":
            if position != "object":
                self._fail(f"literal cannot be a {position}", token=tok)
            return Literal(_unescape(tok.text))
        if tok.kind == "number":
            if position != "object":
                self._fail(f"literal cannot be a {position}", token=tok)
            return Literal(tok.text)
        if tok.kind == "iri":
            self._fail("full IRI terms are not supported",
                       kind="unsupported-construct", token=tok)
        if tok.kind == "word":
            upper = tok.text.upper()
            if tok.text == "a":
                self._fail("the 'a' type shorthand is not supported",
                           kind="unsupported-construct", token=tok)
            if upper in _UNSUPPORTED_KEYWORDS:
                self._fail(f"{upper} is not supported",
                           kind="unsupported-construct", token=tok)
        self._fail(f"expected a term, got {tok.text!r}", token=tok)

    def _limit(self) -> Optional[int]:
        if not self.at_keyword("LIMIT"):
            return None
        self.next()
        tok = self.next()
        if tok.kind != "number" or not re.fullmatch(r"[0-9]+", tok.text) or int(tok.text) < 1:
            self._fail(f"LIMIT requires a positive integer, got {tok.text!r}", token=tok)
        return int(tok.text)

    def _validate(self, ast: QueryAst) -> None:
        bound = ast.pattern_variables()
        if ast.form == "select":
            for name in ast.projection:
                if name not in bound:
                    self._fail(f"projected variable ?{name} is not bound in any pattern")
        if ast.form == "count" and ast.count_var not in bound:
            self._fail(f"counted variable ?{ast.count_var} is not bound in any pattern")
        for idx, pattern in enumerate(ast.patterns):
            own = pattern.variables()
            if len(own) == 3:
                shared = any(own & other.variables()
                             for j, other in enumerate(ast.patterns) if j != idx)
                if not shared:
                    self._fail("fully unconstrained pattern: all three positions are "
                               "variables and none is shared with another pattern")


def parse(query_text: str) -> QueryAst:
    """Parse restricted SPARQL text into a QueryAst. Raises QueryParseError."""
    return _Parser(query_text).parse()
