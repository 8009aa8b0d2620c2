"""Shipped default data: wordlist, gibberish text, benign sample corpus.

These are lazily built, cached module-level singletons.  Everything can be
overridden at the CLI level; the defaults exist so the package works out of
the box and so tests have a stable reference bundle.
"""

from __future__ import annotations

from functools import lru_cache
from importlib import resources

from dga_sentinel.normalize import BenignCorpus, ingest_benign_corpus
from dga_sentinel.textmodels import (
    CorpusModels,
    WordModel,
    build_word_model,
    markov_train,
    train_ngram_model,
)


def data_text(name: str) -> str:
    return resources.files("dga_sentinel.data").joinpath(name).read_text("utf-8")


@lru_cache(maxsize=1)
def default_wordlist() -> tuple[str, ...]:
    return tuple(data_text("wordlist_en.txt").split())


@lru_cache(maxsize=1)
def default_word_model() -> WordModel:
    return build_word_model(default_wordlist())


@lru_cache(maxsize=1)
def default_benign_corpus() -> BenignCorpus:
    return ingest_benign_corpus(data_text("benign_sample.txt").splitlines())


@lru_cache(maxsize=1)
def default_models() -> CorpusModels:
    corpus = default_benign_corpus()
    markov = markov_train(
        data_text("gibberish_train.txt"),
        data_text("gibberish_good.txt").splitlines(),
        data_text("gibberish_bad.txt").splitlines(),
    )
    return CorpusModels(
        ngram3=train_ngram_model(corpus, 3),
        ngram4=train_ngram_model(corpus, 4),
        ngram5=train_ngram_model(corpus, 5),
        word=default_word_model(),
        markov=markov,
    )
