"""Bundled toy knowledge graph and question set for offline runs."""

from importlib import resources


def _toy(name: str) -> str:
    return str(resources.files("kgqa.data").joinpath("toy", name))


def toy_entity_file() -> str:
    return _toy("entities.jsonl")


def toy_predicate_file() -> str:
    return _toy("predicates.jsonl")


def toy_triple_file() -> str:
    return _toy("triples.tsv")


def toy_dataset_file() -> str:
    """20 test questions over the toy graph."""
    return _toy("questions.jsonl")


def toy_train_file() -> str:
    """Small train split used by augmentation and split demos."""
    return _toy("questions_train.jsonl")
