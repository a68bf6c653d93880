import numpy as np
import pytest

from peakemb import LabeledPointSet, TsneConfig, tsne_project
from peakemb.errors import PerplexityTooHigh, TooFewPoints
from peakemb.tsne import joint_probabilities


def two_blobs(seed=100, n_per=30, dim=20, gap=10.0):
    rng = np.random.default_rng(seed)
    a = rng.standard_normal((n_per, dim))
    b = rng.standard_normal((n_per, dim))
    b[:, 0] += gap
    pts = np.vstack([a, b])
    labs = np.array(["a"] * n_per + ["b"] * n_per)
    return LabeledPointSet(pts, labs)


def test_joint_probabilities_sum_and_floor():
    pset = two_blobs()
    P, H = joint_probabilities(pset.points, 15.0)
    assert abs(P.sum() - 1.0) <= 1e-9
    off = ~np.eye(len(pset), dtype=bool)
    assert (P[off] > 0).all()
    np.testing.assert_allclose(P, P.T)


def test_perplexity_matched_in_log_space():
    pset = two_blobs()
    _, H = joint_probabilities(pset.points, 15.0)
    assert np.abs(H - np.log(15.0)).max() <= 1e-4


def test_deterministic_given_seed():
    pset = two_blobs()
    cfg = TsneConfig(seed=3, iterations=300)
    p1 = tsne_project(pset, cfg)
    p2 = tsne_project(pset, cfg)
    assert np.array_equal(p1.coordinates, p2.coordinates)
    assert p1.final_kl == p2.final_kl


@pytest.mark.parametrize("seed", [1, 2, 3, 4, 5, 7])
def test_blob_separation(seed):
    pset = two_blobs()
    proj = tsne_project(pset, TsneConfig(seed=seed))
    coords = proj.coordinates
    labs = proj.labels
    d = np.sqrt(((coords[:, None] - coords[None, :]) ** 2).sum(-1))
    same = labs[:, None] == labs[None, :]
    np.fill_diagonal(same, True)
    off = ~np.eye(len(pset), dtype=bool)
    intra_max = d[same & off].max()
    inter_min = d[~same].min()
    assert intra_max < inter_min


def test_kl_checkpoints_non_increasing():
    pset = two_blobs()
    proj = tsne_project(pset, TsneConfig(seed=11))
    kls = proj.kl_checkpoints
    assert set(kls) == {100, 250, 500, 1000}
    seq = [kls[k] for k in (100, 250, 500, 1000)]
    for earlier, later in zip(seq, seq[1:]):
        assert later <= earlier + 1e-3
    assert proj.final_kl >= 0.0
    assert proj.final_kl == pytest.approx(kls[1000])


def test_equivariance_short_horizon():
    # permuting inputs (with identically permuted init) permutes outputs;
    # verified over a short run because float reordering noise grows
    # exponentially through the exaggeration phase
    pset = two_blobs()
    n = len(pset)
    rng = np.random.default_rng(3)
    y0 = rng.standard_normal((n, 2)) * 1e-4
    perm = np.random.default_rng(9).permutation(n)
    cfg = TsneConfig(seed=3, iterations=10)
    base = tsne_project(pset, cfg, initial_coords=y0)
    permuted_set = LabeledPointSet(pset.points[perm], pset.labels[perm])
    permuted = tsne_project(permuted_set, cfg, initial_coords=y0[perm])
    np.testing.assert_allclose(
        permuted.coordinates, base.coordinates[perm], atol=1e-9
    )


def test_labels_copied():
    pset = two_blobs(n_per=10)
    proj = tsne_project(pset, TsneConfig(perplexity=5, iterations=50, seed=1))
    assert proj.coordinates.shape == (20, 2)
    np.testing.assert_array_equal(proj.labels, pset.labels)


def test_too_few_points():
    pset = LabeledPointSet(np.zeros((4, 2)), ["a", "a", "b", "b"])
    with pytest.raises(TooFewPoints):
        tsne_project(pset, TsneConfig(perplexity=1.0))


def test_perplexity_too_high():
    rng = np.random.default_rng(0)
    pset = LabeledPointSet(rng.normal(size=(10, 3)), ["a"] * 5 + ["b"] * 5)
    with pytest.raises(PerplexityTooHigh):
        tsne_project(pset, TsneConfig(perplexity=3.0))  # needs < (10-1)/3 = 3
