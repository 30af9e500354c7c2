import pytest
from sklearn.base import clone

from cliquetrack import CliquePercolation, CommunityTracker, SnapshotSeries
from helpers import complete_edges, snapshot_of


def small_series():
    groups = (complete_edges([0, 1, 2, 3]),)
    return SnapshotSeries([snapshot_of(*[groups[0]], t=t) for t in range(3)])


class TestEstimatorApi:
    @pytest.mark.parametrize("estimator", [CliquePercolation(), CommunityTracker()])
    def test_get_set_params_roundtrip(self, estimator):
        params = estimator.get_params()
        assert params == {"k": 4, "w_star": 0.0}
        estimator.set_params(k=5, w_star=1.5)
        assert estimator.get_params() == {"k": 5, "w_star": 1.5}

    @pytest.mark.parametrize("estimator", [CliquePercolation(k=5), CommunityTracker(w_star=2.0)])
    def test_sklearn_clone(self, estimator):
        cloned = clone(estimator)
        assert cloned is not estimator
        assert cloned.get_params() == estimator.get_params()

    def test_detector_fit_sets_trailing_underscore_attrs(self):
        est = CliquePercolation(k=4).fit(snapshot_of(complete_edges([0, 1, 2, 3])))
        assert est.cover_.k == 4
        assert est.communities_ == [frozenset({0, 1, 2, 3})]
        assert est.n_communities_ == 1

    def test_tracker_fit_predict(self):
        timelines = CommunityTracker(k=4).fit_predict(small_series())
        assert len(timelines) == 1
        assert timelines[0].t_last == 2

    def test_unfitted_has_no_results(self):
        est = CliquePercolation()
        assert not hasattr(est, "communities_")

    def test_invalid_params_fail_at_fit(self):
        with pytest.raises(ValueError):
            CliquePercolation(k=1).fit(snapshot_of(complete_edges([0, 1, 2])))
        with pytest.raises(ValueError):
            CommunityTracker(w_star=-2.0).fit(small_series())
