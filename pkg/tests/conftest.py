import os

import pytest

from minimaple.checker import check_program
from minimaple.interpreter import RunOptions, run_program
from minimaple.parser import parse_source

CORPUS_DIR = os.path.join(os.path.dirname(os.path.dirname(os.path.abspath(__file__))), 'corpus')


def corpus_file(name: str) -> str:
    return os.path.join(CORPUS_DIR, name)


def read_corpus(name: str) -> str:
    with open(corpus_file(name), encoding='utf-8') as f:
        return f.read()


@pytest.fixture
def corpus():
    """Absolute path of a corpus program."""
    return corpus_file


@pytest.fixture
def corpus_names():
    return sorted(n for n in os.listdir(CORPUS_DIR) if n.endswith('.mm'))


@pytest.fixture
def parse():
    def _parse(text: str, path: str = '<test>'):
        return parse_source(text, path)
    return _parse


@pytest.fixture
def parse_corpus():
    def _parse(name: str):
        return parse_source(read_corpus(name), corpus_file(name))
    return _parse


@pytest.fixture
def check(parse):
    def _check(text: str):
        return check_program(parse(text))
    return _check


@pytest.fixture
def check_corpus(parse_corpus):
    def _check(name: str):
        return check_program(parse_corpus(name))
    return _check


@pytest.fixture
def run(parse):
    def _run(text: str, **options):
        return run_program(parse(text), RunOptions(**options))
    return _run


@pytest.fixture
def run_corpus(parse_corpus):
    def _run(name: str, **options):
        return run_program(parse_corpus(name), RunOptions(**options))
    return _run
