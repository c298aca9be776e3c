"""Identifier patterns for catalog entries ("Q" + digits / "P" + digits)."""

import re

ENTITY_ID_RE = re.compile(r"^Q[0-9]+$")
PREDICATE_ID_RE = re.compile(r"^P[0-9]+$")
ANY_ID_RE = re.compile(r"^[QP][0-9]+$")


def is_entity_id(token: str) -> bool:
    return bool(ENTITY_ID_RE.match(token))


def is_predicate_id(token: str) -> bool:
    return bool(PREDICATE_ID_RE.match(token))
