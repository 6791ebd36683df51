"""
Per-agent cost functions.

An objective holds ``n_agents`` local costs ``f_i`` on ``R^d``; the global
cost is their average. Besides the per-agent ``value``/``gradient`` every
objective offers ``gradients(X)``, which evaluates all agents at once on a
stacked ``(n, d)`` array, since that is what the solvers call every round.
"""

import numpy as np
from scipy.special import expit

__all__ = [
    "Objective",
    "LogisticNonconvex",
    "PLScalar",
    "Quadratic",
    "finite_difference_gradient",
    "softplus",
]


def softplus(t):
    """log(1 + e^t), computed as max(t, 0) + log1p(e^-|t|)."""
    return np.maximum(t, 0.0) + np.log1p(np.exp(-np.abs(t)))


def _check_point(x, d):
    x = np.asarray(x, dtype=np.float64)
    if x.shape[-1] != d:
        raise ValueError(f"expected dimension {d}, got {x.shape[-1]}")
    if not np.all(np.isfinite(x)):
        raise ValueError("non-finite input")
    return x


class Objective:
    """Average of ``n_agents`` smooth local costs.

    Attributes
    ----------
    n_agents, dim : int
    lipschitz : float
        Smoothness constant L_f of the local gradients (an upper estimate).
    nu : float or None
        P-L constant of the global cost when known.
    f_star : float or None
        Global minimum value when known.
    """

    nu = None
    f_star = None

    def _check_agent(self, agent):
        if not 0 <= agent < self.n_agents:
            raise IndexError(f"agent {agent} out of range for {self.n_agents} agents")

    def value(self, agent, x):
        self._check_agent(agent)
        return float(self._value(agent, _check_point(x, self.dim)))

    def gradient(self, agent, x):
        self._check_agent(agent)
        return self._gradient(agent, _check_point(x, self.dim))

    def gradients(self, X):
        """Row ``i`` is the gradient of ``f_i`` at ``X[i]``."""
        X = _check_point(X, self.dim)
        return np.stack([self._gradient(i, X[i]) for i in range(self.n_agents)])

    def global_value_and_gradient(self, x):
        """Value and gradient of ``f = (1/n) sum_i f_i`` at a single point."""
        x = _check_point(x, self.dim)
        vals = [self._value(i, x) for i in range(self.n_agents)]
        grads = [self._gradient(i, x) for i in range(self.n_agents)]
        return float(np.mean(vals)), np.mean(grads, axis=0)

    def pl_residual(self, x):
        """``0.5 ||grad f(x)||^2 - nu (f(x) - f*)``; nonnegative where P-L holds."""
        if self.nu is None or self.f_star is None:
            raise ValueError(f"{type(self).__name__} has no known nu and f*")
        f, g = self.global_value_and_gradient(x)
        return 0.5 * float(g @ g) - self.nu * (f - self.f_star)


class LogisticNonconvex(Objective):
    """Logistic loss with the nonconvex penalty ``lam*mu*x^2 / (1 + mu*x^2)``.

    Parameters
    ----------
    features : sequence of arrays, agent ``i`` holding shape ``(m_i, d)``
    labels : sequence of arrays in {0, 1}, agent ``i`` holding shape ``(m_i,)``
    lam, mu : float
        Penalty weight and curvature.
    """

    def __init__(self, features, labels, lam=0.001, mu=1.0):
        if len(features) != len(labels) or not features:
            raise ValueError("need one feature matrix and label vector per agent")
        if lam < 0 or mu < 0:
            raise ValueError("lam and mu must be nonnegative")
        self.features = [np.asarray(z, dtype=np.float64) for z in features]
        self.labels = [np.asarray(y, dtype=np.float64) for y in labels]
        dims = {z.shape[1] for z in self.features}
        if len(dims) != 1:
            raise ValueError(f"agents disagree on dimension: {sorted(dims)}")
        for z, y in zip(self.features, self.labels):
            if z.shape[0] != y.shape[0]:
                raise ValueError("features and labels differ in length")
            if not np.all((y == 0) | (y == 1)):
                raise ValueError("labels must be 0 or 1")
        self.lam = float(lam)
        self.mu = float(mu)
        self.n_agents = len(self.features)
        self.dim = dims.pop()
        self.m = sum(z.shape[0] for z in self.features)
        self.scale = self.n_agents / self.m
        self._Z_all = np.concatenate(self.features)
        self._y_all = np.concatenate(self.labels)
        # equal sample counts allow one batched contraction over all agents
        sizes = {z.shape[0] for z in self.features}
        self._Z = np.stack(self.features) if len(sizes) == 1 else None
        self._Y = np.stack(self.labels)[:, :, None] if len(sizes) == 1 else None
        self._ZT = np.ascontiguousarray(self._Z.transpose(0, 2, 1)) if len(sizes) == 1 else None
        smax = np.linalg.norm(self._Z_all, 2)
        self.lipschitz = self.scale * 0.25 * smax**2 + 2 * self.lam * self.mu

    def _penalty(self, x):
        u = self.mu * x**2
        return self.lam * np.sum(u / (1 + u), axis=-1)

    def _penalty_grad(self, x):
        return 2 * self.lam * self.mu * x / (1 + self.mu * x**2) ** 2

    def _value(self, agent, x):
        t = self.features[agent] @ x
        loss = np.sum(softplus(t) - self.labels[agent] * t)
        return self.scale * loss + self._penalty(x)

    def _gradient(self, agent, x):
        z = self.features[agent]
        t = z @ x
        return self.scale * (z.T @ (expit(t) - self.labels[agent])) + self._penalty_grad(x)

    def gradients(self, X):
        if self._Z is None:
            return super().gradients(X)
        X = _check_point(X, self.dim)
        t = np.matmul(self._Z, X[:, :, None])
        r = expit(t) - self._Y
        return self.scale * np.matmul(self._ZT, r)[:, :, 0] + self._penalty_grad(X)

    def global_value_and_gradient(self, x):
        x = _check_point(x, self.dim)
        n = self.n_agents
        t = self._Z_all @ x
        loss = np.sum(softplus(t) - self._y_all * t)
        value = self.scale * loss / n + self._penalty(x)
        grad = self.scale * (self._Z_all.T @ (expit(t) - self._y_all)) / n
        return float(value), grad + self._penalty_grad(x)


class PLScalar(Objective):
    """``sum_s x_s^2 + 3 sin^2(x_s)``, shared by every agent.

    Nonconvex, but satisfies the P-L inequality with ``nu = 1/32`` and
    ``f* = 0``.
    """

    nu = 1 / 32
    f_star = 0.0
    lipschitz = 8.0

    def __init__(self, dim=1, n_agents=1):
        self.dim = dim
        self.n_agents = n_agents

    def _value(self, agent, x):
        return np.sum(x**2 + 3 * np.sin(x) ** 2, axis=-1)

    def _gradient(self, agent, x):
        return 2 * x + 3 * np.sin(2 * x)

    def gradients(self, X):
        return self._gradient(None, _check_point(X, self.dim))

    def global_value_and_gradient(self, x):
        x = _check_point(x, self.dim)
        return float(self._value(None, x)), self._gradient(None, x)


class Quadratic(Objective):
    """``f_i(x) = 0.5 x'Q_i x + b_i'x``.

    ``Q`` is ``(d, d)`` (shared) or ``(n, d, d)``; ``b`` is ``(d,)`` or
    ``(n, d)``. When the averaged ``Q`` is positive definite, ``f_star``
    and ``nu`` (its smallest eigenvalue) are filled in.
    """

    def __init__(self, Q, b=None, n_agents=None):
        Q = np.asarray(Q, dtype=np.float64)
        if Q.ndim == 2:
            n = 1 if n_agents is None else n_agents
            Q = np.broadcast_to(Q, (n,) + Q.shape)
        d = Q.shape[-1]
        n = Q.shape[0]
        if n_agents is not None and n != n_agents:
            raise ValueError("Q stack does not match n_agents")
        if not np.allclose(Q, np.swapaxes(Q, 1, 2)):
            raise ValueError("Q must be symmetric")
        b = np.zeros(d) if b is None else np.asarray(b, dtype=np.float64)
        b = np.broadcast_to(b, (n, d))
        self.Q, self.b = np.array(Q), np.array(b)
        self.n_agents, self.dim = n, d
        self.lipschitz = float(max(np.abs(np.linalg.eigvalsh(q)).max() for q in self.Q))

        Qbar, bbar = self.Q.mean(axis=0), self.b.mean(axis=0)
        eig = np.linalg.eigvalsh(Qbar)
        if eig[0] > 1e-12:
            x_star = np.linalg.solve(Qbar, -bbar)
            self.x_star = x_star
            self.f_star = float(0.5 * x_star @ Qbar @ x_star + bbar @ x_star)
            self.nu = float(eig[0])

    def _value(self, agent, x):
        return 0.5 * x @ self.Q[agent] @ x + self.b[agent] @ x

    def _gradient(self, agent, x):
        return self.Q[agent] @ x + self.b[agent]

    def gradients(self, X):
        X = _check_point(X, self.dim)
        return np.einsum("nij,nj->ni", self.Q, X) + self.b


def finite_difference_gradient(fun, x, h=1e-6):
    """Central differences of a scalar function, one coordinate at a time."""
    x = np.asarray(x, dtype=np.float64)
    g = np.empty_like(x)
    for s in range(x.size):
        e = np.zeros_like(x)
        e[s] = h
        g[s] = (fun(x + e) - fun(x - e)) / (2 * h)
    return g
