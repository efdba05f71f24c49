import os
import subprocess
import sys

import numpy as np

import sigraph._kernels as K
from sigraph.baseline import synthetic_dataset
from sigraph.cluster import cosine_distance_matrix
from sigraph.forest import ForestParams, train_forest


def test_backend_reflects_environment():
    assert K.active_backend() in ("numba", "numpy")
    assert K.active_backend() == ("numba" if K.HAVE_NUMBA else "numpy")


def test_best_split_paths_agree_bitwise():
    rng = np.random.default_rng(42)
    for _ in range(200):
        n = int(rng.integers(2, 50))
        ncls = int(rng.integers(2, 5))
        vals = np.sort(np.round(rng.normal(size=n), int(rng.integers(0, 3))))
        labels = rng.integers(0, ncls, size=n).astype(np.int64)
        nb = K._nb_best_split(vals, labels, np.int64(ncls))
        np_ = K._np_best_split(vals, labels, ncls)
        assert bool(nb[2]) == bool(np_[2])
        if np_[2]:
            assert nb[0] == np_[0]  # identical float score
            assert nb[1] == np_[1]  # identical threshold


def test_best_split_constant_column():
    vals = np.array([1.0, 1.0, 1.0])
    labels = np.array([0, 1, 0], dtype=np.int64)
    assert not K._np_best_split(vals, labels, 2)[2]
    assert not bool(K._nb_best_split(vals, labels, np.int64(2))[2])


def test_linkage_paths_agree_bitwise():
    rng = np.random.default_rng(11)
    for _ in range(40):
        n = int(rng.integers(3, 20))
        X = rng.normal(size=(n, 3))
        D = cosine_distance_matrix(X)
        k = int(rng.integers(1, n))
        m1, h1 = K._nb_linkage_merge(D.copy(), n - k)
        m2, h2 = K._np_linkage_merge(D.copy(), n - k)
        assert np.array_equal(m1, m2)
        assert np.array_equal(h1, h2)


def test_forest_leaves_paths_agree():
    data = synthetic_dataset(6, 120, seed=1)
    forest = train_forest(data, ForestParams(n_trees=4, max_depth=4, seed=5))
    f, t, l, r, c, off = forest.flat_arrays()
    lv1 = K._nb_forest_leaves(data.rows, f, t, l, r, off)
    lv2 = K._np_forest_leaves(data.rows, f, t, l, r, off)
    assert np.array_equal(lv1, lv2)


def test_pure_numpy_env_flag_gives_identical_forest():
    # a subprocess with SIG_PURE_NUMPY=1 must train the exact same forest
    code = (
        "import sigraph as sg\n"
        "import sigraph._kernels as K\n"
        "data = sg.synthetic_dataset(7, 90, seed=4)\n"
        "forest = sg.train_forest(data, sg.ForestParams(n_trees=4, max_depth=4, seed=9))\n"
        "print(K.active_backend())\n"
        "print(sg.export_forest(forest), end='')\n"
    )
    env = dict(os.environ)
    outs = {}
    for backend, flag in (("numpy", "1"), ("default", "")):
        env["SIG_PURE_NUMPY"] = flag
        res = subprocess.run(
            [sys.executable, "-c", code], capture_output=True, text=True, env=env, check=True
        )
        first, rest = res.stdout.split("\n", 1)
        outs[backend] = rest
        if flag:
            assert first == "numpy"
    assert outs["numpy"] == outs["default"]
