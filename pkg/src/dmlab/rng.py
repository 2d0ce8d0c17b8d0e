"""Counter-based random streams.

Every consumer of randomness owns a Philox substream keyed by
(seed, replication, index, tag), so datasets, weight initialization, and
batch shuffling are reproducible and independent of execution order.
Normal draws come from inverse-CDF transformation of uniforms; the
variates handed back are exactly the xi that enter the score formulas.
"""

import numpy as np

from dmlab.special import norm_ppf

# Packing limits for the second Philox key word.
_MAX_REP = 1 << 24
_MAX_INDEX = 1 << 32
_MAX_TAG = 1 << 8

# Tags namespace the substreams hanging off one (seed, replication) pair.
TAG_INNER = 0        # inner draws of one training point (index = point)
TAG_SPOTS = 1        # training-spot sampling (index = 0)
TAG_INIT = 2         # network weight init (index = method slot)
TAG_SHUFFLE = 3      # minibatch shuffling (index = method slot)


def substream(seed, replication=0, index=0, tag=0):
    """Independent generator for one (seed, replication, index, tag) cell."""
    if not (0 <= replication < _MAX_REP and 0 <= index < _MAX_INDEX
            and 0 <= tag < _MAX_TAG):
        raise ValueError("substream key out of range")
    key = np.array(
        [np.uint64(seed & 0xFFFFFFFFFFFFFFFF),
         (np.uint64(replication) << np.uint64(40))
         | (np.uint64(index) << np.uint64(8))
         | np.uint64(tag)],
        dtype=np.uint64,
    )
    return np.random.Generator(np.random.Philox(key=key))


def standard_normals(gen, shape):
    """Standard normals via inverse-CDF transform of uniforms."""
    u = gen.random(shape)
    u = np.where(u == 0.0, 2.0 ** -53, u)
    return norm_ppf(u)
