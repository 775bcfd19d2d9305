"""The numba kernels and their numpy fallbacks must agree."""

import os
import subprocess
import sys

import numpy as np
import pytest

from pfca import _kernels as K
from pfca.config import RunConfig
from pfca.context import object_intent
from pfca.miner import mine_mscr

from conftest import boolean_context

needs_numba = pytest.mark.skipif(not K.HAVE_NUMBA, reason="numba not available")


def random_bits(rng, n_obj, n_cols):
    mask = rng.random((n_obj, n_cols)) < 0.5
    return mask, K.pack_columns(mask)


def test_pack_and_unpack_round_trip():
    rng = np.random.default_rng(0)
    for n in (1, 63, 64, 65, 200):
        mask, bits = random_bits(rng, n, 3)
        for j in range(3):
            np.testing.assert_array_equal(K.bitset_to_indices(bits[j], n), np.flatnonzero(mask[:, j]))
        assert K.popcount_np(K.full_bitset(n)) == n


@needs_numba
def test_extension_counts_agree():
    rng = np.random.default_rng(1)
    mask, cols = random_bits(rng, 150, 20)
    ext = cols[0] & cols[3]
    ext_c = ext & cols[7]
    for a, b in zip(K.extension_counts_np(ext, ext_c, cols), K.extension_counts_nb(ext, ext_c, cols)):
        np.testing.assert_array_equal(a, b)
    assert K.popcount_nb(ext) == K.popcount_np(ext) == int((mask[:, 0] & mask[:, 3]).sum())


@needs_numba
def test_fisher_agree():
    rng = np.random.default_rng(2)
    cells = rng.integers(0, 120, size=(4, 500))
    a = K.fisher_log_greater_batch_np(*cells)
    b = K.fisher_log_greater_batch_nb(*cells)
    np.testing.assert_allclose(a, b, rtol=1e-12, atol=1e-12)


@needs_numba
def test_fisher_expand_agree():
    rng = np.random.default_rng(3)
    for trial in range(20):
        # duplicated columns give repeated child extents, which both versions must collapse
        mask, cols = random_bits(rng, 90, 10)
        cols = np.concatenate([cols, cols[:4]])
        ext = cols[trial % 5]
        concl = cols[5]
        blocked = np.zeros(len(cols), dtype=bool)
        blocked[trial % 5] = True
        n_p, n_b = K.popcount_np(ext), K.popcount_np(ext & concl)
        if n_p == 0:
            continue
        out_np = K.fisher_expand_np(ext, ext & concl, cols, blocked, n_p, n_b, np.log(0.2))
        out_nb = K.fisher_expand_nb(ext, ext & concl, cols, blocked, n_p, n_b, np.log(0.2))
        for a, b in zip(out_np, out_nb):
            np.testing.assert_allclose(a, b, rtol=1e-12)


@needs_numba
def test_upsilon_scores_agree():
    rng = np.random.default_rng(4)
    ctx = boolean_context(rng.integers(0, 2, size=(8, 5)).tolist())
    rules = mine_mscr(ctx, None, RunConfig(mode="exact", max_premise_len=3))
    ptr, lits, concl = rules.compiled
    gam = rules.gammas()
    for g in range(ctx.n_objects):
        for drop in range(3):
            L = sorted(object_intent(ctx, g))[drop:]
            in_l = np.zeros(ctx.n_literals, dtype=bool)
            in_l[L] = True
            a = K.upsilon_scores_np(in_l, ptr, lits, concl, gam)
            b = K.upsilon_scores_nb(in_l, ptr, lits, concl, gam)
            assert a[0] == pytest.approx(b[0], abs=1e-9)
            for x, y in zip(a[1:], b[1:]):
                np.testing.assert_allclose(x, y, atol=1e-9)


def test_env_flag_selects_numpy_path():
    code = (
        "from pfca import _kernels as K; "
        "assert not K.HAVE_NUMBA; "
        "assert K.upsilon_scores is K.upsilon_scores_np; "
        "assert K.fisher_expand is K.fisher_expand_np; print('ok')"
    )
    env = dict(os.environ, PFCA_DISABLE_NUMBA="1")
    out = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True)
    assert out.returncode == 0, out.stderr
    assert out.stdout.strip() == "ok"


def test_numpy_path_mines_identically(tmp_path):
    """A full Fisher-mode run through the fallback gives the same rule dump."""
    script = (
        "import sys; from pfca.synthetic import *; from pfca.miner import mine_mscr; from pfca.io import dump_rules\n"
        "ctx, _, _ = generate_synthetic(SyntheticSpec(n_classes=4, copies_per_class=10, n_attributes=8, values_per_attribute=4), seed=2)\n"
        "dump_rules(ctx, mine_mscr(ctx), sys.argv[1])\n"
    )
    paths = []
    for flag in ("1", "0"):
        p = tmp_path / f"rules_{flag}.jsonl"
        env = dict(os.environ, PFCA_DISABLE_NUMBA=flag)
        out = subprocess.run([sys.executable, "-c", script, str(p)], env=env, capture_output=True, text=True)
        assert out.returncode == 0, out.stderr
        paths.append(p)
    assert paths[0].read_bytes() == paths[1].read_bytes()
