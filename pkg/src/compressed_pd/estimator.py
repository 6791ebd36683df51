"""
scikit-learn front end: fit the nonconvex logistic model by simulating the
distributed solvers on a row-partitioned training set.
"""

import numpy as np
from scipy.special import expit
from sklearn.base import BaseEstimator, ClassifierMixin
from sklearn.preprocessing import LabelEncoder
from sklearn.utils.validation import check_array, check_is_fitted, check_random_state, check_X_y

from .algorithms import HyperParams, agent_streams, run
from .compressors import make_compressor
from .objectives import LogisticNonconvex
from .topology import random_geometric_graph

__all__ = ["DistributedLogisticClassifier"]


class DistributedLogisticClassifier(ClassifierMixin, BaseEstimator):
    """Binary classifier trained by a simulated network of agents.

    The rows of ``X`` are dealt out in contiguous blocks to ``n_agents``
    agents connected by a random geometric graph. Each agent holds the
    logistic loss of its block plus the penalty
    ``lam * mu * w^2 / (1 + mu * w^2)``, and the agents run ``variant``
    with the chosen compressor. The fitted weights are the agents' average.

    Parameters
    ----------
    n_agents : int
    variant : {"dpda", "alg1", "alg2", "alg3"}
    compressor : str
        Registry name, see :data:`compressed_pd.compressors.COMPRESSORS`.
    compressor_params : dict or None
    alpha, beta, eta, psi, sigma, s0, gamma : float or None
        Solver step sizes. ``psi`` is needed by alg1/alg2, ``sigma`` by
        alg2 and ``s0``, ``gamma`` by alg3. ``eta=None`` picks
        ``1 / (L_f + alpha * rho(L))`` from the smoothness constant of the
        training loss and the graph.
    lam, mu : float
        Penalty weight and curvature.
    radius : float
        Connection radius of the communication graph.
    rho_target : float
        Edge weights are scaled so the largest Laplacian eigenvalue equals
        this; 0 keeps unit weights.
    fit_intercept : bool
        Append a constant feature.
    max_iter : int
    tol : float
        Stop once the stationarity measure ``P`` drops to ``tol``.
    random_state : int or None
        Seeds the graph, the starting point and the compressor streams.

    Attributes
    ----------
    classes_ : ndarray of shape (2,)
    coef_ : ndarray of shape (1, n_features)
    intercept_ : ndarray of shape (1,)
    agent_coefs_ : ndarray of shape (n_agents, n_features + fit_intercept)
    eta_ : float
        Step size used.
    n_iter_ : int
    history_ : list of RunRecord
    """

    def __init__(
        self,
        n_agents=20,
        variant="dpda",
        compressor="identity",
        compressor_params=None,
        alpha=1.0,
        beta=1.0,
        eta=None,
        psi=None,
        sigma=None,
        s0=None,
        gamma=None,
        lam=0.001,
        mu=1.0,
        radius=0.5,
        rho_target=0.0,
        fit_intercept=True,
        max_iter=5000,
        tol=1e-12,
        random_state=None,
    ):
        self.n_agents = n_agents
        self.variant = variant
        self.compressor = compressor
        self.compressor_params = compressor_params
        self.alpha = alpha
        self.beta = beta
        self.eta = eta
        self.psi = psi
        self.sigma = sigma
        self.s0 = s0
        self.gamma = gamma
        self.lam = lam
        self.mu = mu
        self.radius = radius
        self.rho_target = rho_target
        self.fit_intercept = fit_intercept
        self.max_iter = max_iter
        self.tol = tol
        self.random_state = random_state

    def _augment(self, X):
        if self.fit_intercept:
            return np.hstack([X, np.ones((X.shape[0], 1))])
        return X

    def fit(self, X, y):
        X, y = check_X_y(X, y, dtype=np.float64)
        encoder = LabelEncoder().fit(y)
        if len(encoder.classes_) != 2:
            raise ValueError(f"binary targets only, got {len(encoder.classes_)} classes")
        if not 2 <= self.n_agents <= X.shape[0]:
            raise ValueError(f"n_agents must lie in [2, n_samples], got {self.n_agents}")
        self.classes_ = encoder.classes_
        self.n_features_in_ = X.shape[1]
        Z = self._augment(X)
        labels = encoder.transform(y).astype(np.float64)

        seed = int(check_random_state(self.random_state).randint(np.iinfo(np.int32).max))
        graph_rng = np.random.default_rng([seed, 0])
        topo = random_geometric_graph(self.n_agents, self.radius, graph_rng, max_retries=10_000)
        if self.rho_target:
            topo = topo.scaled(self.rho_target / topo.rho)

        blocks = np.array_split(np.arange(Z.shape[0]), self.n_agents)
        objective = LogisticNonconvex(
            [Z[b] for b in blocks], [labels[b] for b in blocks], lam=self.lam, mu=self.mu
        )
        eta = self.eta
        if eta is None:
            eta = 1.0 / (objective.lipschitz + self.alpha * topo.rho)
        self.eta_ = eta
        hyper = HyperParams(
            alpha=self.alpha,
            beta=self.beta,
            eta=eta,
            psi=self.psi,
            sigma=self.sigma,
            s0=self.s0,
            gamma=self.gamma,
        )
        comp = make_compressor(self.compressor, dim=Z.shape[1], **(self.compressor_params or {}))
        x0 = 0.1 * np.random.default_rng([seed, 2]).standard_normal((self.n_agents, Z.shape[1]))
        state, records = run(
            self.variant,
            topo,
            objective,
            hyper,
            x0,
            self.max_iter,
            compressor=comp,
            rng=agent_streams(seed, self.n_agents),
            stop_below=self.tol,
        )
        self.topology_ = topo
        self.agent_coefs_ = state.x
        self.history_ = records
        self.n_iter_ = len(records)
        w = state.x.mean(axis=0)
        if self.fit_intercept:
            self.coef_, self.intercept_ = w[None, :-1], w[-1:]
        else:
            self.coef_, self.intercept_ = w[None, :], np.zeros(1)
        return self

    def decision_function(self, X):
        check_is_fitted(self, "coef_")
        X = check_array(X, dtype=np.float64)
        if X.shape[1] != self.n_features_in_:
            raise ValueError(f"X has {X.shape[1]} features, expected {self.n_features_in_}")
        return X @ self.coef_[0] + self.intercept_[0]

    def predict_proba(self, X):
        p = expit(self.decision_function(X))
        return np.column_stack([1 - p, p])

    def predict(self, X):
        scores = self.decision_function(X)
        return self.classes_[(scores > 0).astype(int)]
