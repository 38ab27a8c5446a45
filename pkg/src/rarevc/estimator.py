"""scikit-learn style front end: fit on a sample, read off the deviation and its bound."""

from sklearn.base import BaseEstimator

from ._validation import check_probability, check_unit_sample
from .bounds import BoundKind, evaluate
from .classes import get_class
from .montecarlo import bound_input_for


class RareDeviationBound(BaseEstimator):
    """High-probability bound on the maximal deviation over a rare-region class.

    Parameters
    ----------
    kind : str, default="expectation-route"
        Which bound to evaluate, one of the :class:`~rarevc.bounds.BoundKind` values.
    delta : float, default=0.01
        Failure probability.
    p : float, default=1e-3
        Mass of the rare region ``[0, p]`` under the uniform reference measure.
    class_id : str, default="tail-halflines"
        Registered set class.

    Attributes
    ----------
    n_samples_ : int
    tail_count_ : int
        Number of observations inside the rare region.
    sup_deviation_ : float
        Exact maximal deviation of the fitted sample over the class.
    bound_ : BoundResult
    covered_ : bool
        Whether ``sup_deviation_ <= bound_.total``; ``False`` when the bound is invalid.
    """

    def __init__(self, kind="expectation-route", delta=0.01, p=1e-3, class_id="tail-halflines"):
        self.kind = kind
        self.delta = delta
        self.p = p
        self.class_id = class_id

    def fit(self, X, y=None):
        X = check_unit_sample(X)
        check_probability(self.delta, "delta")
        check_probability(self.p, "p")
        kind = BoundKind.parse(self.kind)
        set_class = get_class(self.class_id, self.p)

        n = X.shape[0]
        tail = X[set_class.in_rare_region(X)]
        tail.sort()
        self.n_samples_ = n
        self.tail_count_ = int(tail.size)
        self.sup_deviation_ = float(set_class.statistic(tail, n))
        self.bound_ = evaluate(kind, bound_input_for(set_class, n, self.delta))
        self.covered_ = bool(self.bound_.valid and self.sup_deviation_ <= self.bound_.total)
        return self
