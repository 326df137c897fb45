# coding: UTF-8
"""Deterministic seed derivation.

A campaign has a single 64-bit seed. Every component that needs randomness derives its own
sub-seed from it through a sha256 hash chain, so results never depend on execution order::

    h0 = sha256(str(seed))
    hk = sha256(h(k-1) || label_k)
    sub_seed = first 8 bytes of hn, big-endian

Example
-------
>>> derive_seed(42, 'generator') == derive_seed(42, 'generator')
True
>>> derive_seed(42, 'generator') == derive_seed(42, 'audits')
False
"""
from hashlib import sha256

from numpy.random import default_rng

from .errors import PreconditionError


SEED_LIMIT = 2 ** 64


def check_seed(seed):
    """Return ``seed`` as int, rejecting anything outside ``[0, 2**64)``."""
    if isinstance(seed, bool) or int(seed) != seed:
        raise PreconditionError('seed must be an integer, got %r' % (seed,))
    seed = int(seed)
    if not 0 <= seed < SEED_LIMIT:
        raise PreconditionError('seed must be a 64-bit unsigned integer, got %d' % seed)
    return seed


def derive_seed(seed, *labels):
    """Derive a 64-bit sub-seed from ``seed`` and a chain of labels.

    Parameters
    ----------
    seed : int
        Parent seed.
    *labels
        Anything with a stable ``str``; typically component names, test-case ids, trial indexes.

    Returns
    -------
    int
        Sub-seed in ``[0, 2**64)``.
    """
    digest = sha256(str(check_seed(seed)).encode('utf-8')).digest()
    for label in labels:
        digest = sha256(digest + str(label).encode('utf-8')).digest()
    return int.from_bytes(digest[:8], 'big')


def make_rng(seed, *labels):
    return default_rng(derive_seed(seed, *labels))
