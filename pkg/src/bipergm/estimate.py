"""Parameter estimation: pseudo-likelihood, Monte-Carlo MLE, profiles.

The pseudo-likelihood estimator is a Newton logistic fit of dyad states
on change statistics.  The Monte-Carlo MLE re-anchors an importance-
sampled log-likelihood-ratio surrogate until the anchor stops moving,
then reports absolute log-likelihood through a bridge of simulations
along the straight path from the zero parameter (whose normalizer is
known in closed form) to the estimate, so profile curves over different
exponents share one reference.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.special import erfc, expit, logsumexp

from .graph import Attributes, BipartiteNetwork
from .oracle import hull_direction
from .sampler import RNG_ALGORITHM, SamplerControl, simulate
from .terms import BoundModel, ModelSpec, bind


class EstimationError(RuntimeError):
    """Estimation could not produce a finite, trustworthy estimate."""


class SeparationError(EstimationError):
    """The logistic pseudo-likelihood is maximized at infinity; `direction`
    is a separating direction in statistic space."""

    def __init__(self, message: str, direction: np.ndarray):
        super().__init__(message)
        self.direction = direction


class NonConvergenceError(EstimationError):
    """The Monte-Carlo MLE loop gave up (hull violations or step limit)."""


class DegeneracyWarning(UserWarning):
    """Simulated chains produced near-constant statistics."""


def significance_stars(p_value: float) -> str:
    """Stars at the 0.05 / 0.001 / 0.0001 levels."""
    if p_value < 1e-4:
        return "***"
    if p_value < 1e-3:
        return "**"
    if p_value < 0.05:
        return "*"
    return ""


def wald_p_value(estimate: float, std_error: float) -> float:
    if std_error <= 0.0:
        return 0.0 if estimate != 0.0 else 1.0
    z = abs(estimate) / std_error
    return float(erfc(z / math.sqrt(2.0)))


@dataclass
class FitResult:
    """Coefficients, covariance, approximate log-likelihood, diagnostics."""

    method: str  # "mple" or "mcmcmle"
    names: list[str]
    theta: np.ndarray
    covariance: np.ndarray
    loglik: float
    loglik_sd: float
    diagnostics: dict = field(default_factory=dict)
    formula: str | None = None

    @property
    def std_errors(self) -> np.ndarray:
        return np.sqrt(np.clip(np.diag(self.covariance), 0.0, None))

    @property
    def p_values(self) -> np.ndarray:
        se = self.std_errors
        return np.array([wald_p_value(t, s) for t, s in zip(self.theta, se)])

    def summary(self) -> str:
        width = max(12, max((len(n) for n in self.names), default=0) + 2)
        lines = []
        if self.formula:
            lines.append(f"model: {self.formula}")
        lines.append(f"method: {self.method}")
        lines.append(f"{'statistic':<{width}}{'estimate':>12}{'s.e.':>12}")
        for name, est, se, p in zip(self.names, self.theta, self.std_errors, self.p_values):
            lines.append(f"{name:<{width}}{est:>12.4f}{se:>12.4f}  {significance_stars(p)}")
        lines.append("significance: * p<0.05, ** p<0.001, *** p<0.0001 (Wald z-test)")
        lines.append(f"log-likelihood: {self.loglik:.4f} (mc sd {self.loglik_sd:.4f})")
        for key in ("seed", "rng", "control", "anchors", "acceptance_rate"):
            if key in self.diagnostics:
                lines.append(f"{key}: {self.diagnostics[key]}")
        return "\n".join(lines)


def contrast(fit: FitResult, weights) -> tuple[float, float]:
    """Linear combination of coefficients and its standard error."""
    w = np.asarray(weights, dtype=np.float64)
    if w.shape != fit.theta.shape:
        raise ValueError(f"weights have shape {w.shape}, fit has {fit.theta.shape}")
    estimate = float(w @ fit.theta)
    variance = float(w @ fit.covariance @ w)
    return estimate, math.sqrt(max(variance, 0.0))


# ---------------------------------------------------------------------------
# maximum pseudo-likelihood
# ---------------------------------------------------------------------------


def _dyad_design(model: BoundModel, net: BipartiteNetwork) -> tuple[np.ndarray, np.ndarray]:
    D = net.dyad_count
    X = np.empty((D, model.p))
    y = np.empty(D)
    row = np.zeros(model.p)
    d = 0
    for i in range(1, net.n1 + 1):
        nbr = net.neighbors(i)
        for k in range(net.n1 + 1, net.n + 1):
            model.delta_into(net, i, k, row)
            X[d] = row
            y[d] = 1.0 if k in nbr else 0.0
            d += 1
    return X, y


def _separating_direction(X: np.ndarray, y: np.ndarray) -> np.ndarray | None:
    """Direction w with sign(2y-1) * Xw >= 0 everywhere and > 0 somewhere,
    which is exactly when the logistic MLE fails to exist."""
    from scipy.optimize import linprog

    signed = (2.0 * y - 1.0)[:, None] * X
    signed = np.unique(np.round(signed, 12), axis=0)
    res = linprog(
        c=-signed.sum(axis=0),
        A_ub=-signed,
        b_ub=np.zeros(signed.shape[0]),
        bounds=[(-1.0, 1.0)] * X.shape[1],
        method="highs",
    )
    if res.status == 0 and -res.fun > 1e-9:
        return res.x
    return None


def _pseudo_loglik(X, y, theta) -> float:
    eta = X @ theta
    return float(np.sum(y * eta - np.logaddexp(0.0, eta)))


def mple(
    spec: ModelSpec,
    net: BipartiteNetwork,
    attrs: Attributes,
    formula: str | None = None,
    grad_tol: float = 1e-8,
    max_iter: int = 100,
) -> FitResult:
    """Maximum pseudo-likelihood: logistic Newton fit of dyad states on
    change statistics, covariance from the inverse negative Hessian."""
    model = bind(spec, net, attrs)
    X, y = _dyad_design(model, net)
    direction = _separating_direction(X, y)
    if direction is not None:
        raise SeparationError(
            "pseudo-likelihood is non-estimable: complete separation along "
            f"direction {np.round(direction, 6)}",
            np.asarray(direction),
        )
    theta = np.zeros(model.p)
    hess = None
    converged = False
    iterations = 0
    for iterations in range(1, max_iter + 1):
        eta = X @ theta
        mu = expit(eta)
        grad = X.T @ (y - mu)
        if float(np.linalg.norm(grad)) <= grad_tol:
            converged = True
            break
        w = mu * (1.0 - mu)
        hess = (X * w[:, None]).T @ X
        try:
            step = np.linalg.solve(hess + 1e-12 * np.eye(model.p), grad)
        except np.linalg.LinAlgError:
            step = np.linalg.lstsq(hess, grad, rcond=None)[0]
        base = _pseudo_loglik(X, y, theta)
        scale = 1.0
        while scale > 1e-12:
            cand = theta + scale * step
            if _pseudo_loglik(X, y, cand) >= base:
                theta = cand
                break
            scale *= 0.5
        if float(np.linalg.norm(theta)) > 40.0:
            break
    if not converged:
        raise EstimationError(
            f"pseudo-likelihood Newton did not converge in {max_iter} iterations"
        )
    mu = expit(X @ theta)
    w = mu * (1.0 - mu)
    hess = (X * w[:, None]).T @ X
    try:
        cov = np.linalg.inv(hess)
    except np.linalg.LinAlgError:
        warnings.warn("singular pseudo-likelihood Hessian; using pseudo-inverse")
        cov = np.linalg.pinv(hess)
    cov = 0.5 * (cov + cov.T)
    return FitResult(
        method="mple",
        names=list(model.names),
        theta=theta,
        covariance=cov,
        loglik=_pseudo_loglik(X, y, theta),
        loglik_sd=0.0,
        diagnostics={"iterations": iterations, "dyads": len(y)},
        formula=formula,
    )


# ---------------------------------------------------------------------------
# Monte-Carlo maximum likelihood
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class FitControl:
    """Monte-Carlo MLE knobs on top of the sampler control.

    Early anchors run on a fraction of the sample size (ramping up by
    doubling); with noise_stop the loop also ends once the anchor step is
    within the Monte-Carlo noise of the estimate at full sample size.
    """

    sampler: SamplerControl = SamplerControl()
    max_anchors: int = 20
    step_tol: float = 1e-4
    ramp: float = 0.125
    noise_stop: bool = True
    bridge_legs: int = 12
    bridge_draws: int = 2000
    bridge_interval: int | None = None


def _effective_sample_size(column: np.ndarray) -> float:
    """ESS from the initial-positive-sequence autocorrelation estimate."""
    x = np.asarray(column, dtype=np.float64)
    n = x.size
    x = x - x.mean()
    var = float(x @ x) / n
    if var <= 0.0 or n < 4:
        return float(n)
    size = 1
    while size < 2 * n:
        size <<= 1
    f = np.fft.rfft(x, size)
    acov = np.fft.irfft(f * np.conj(f))[:n].real / n
    rho = acov / acov[0]
    total = 0.0
    m = 0
    while 2 * m + 1 < n:
        gamma = rho[2 * m] + rho[2 * m + 1]
        if gamma <= 0.0:
            break
        total += gamma
        m += 1
    tau = max(1.0, 2.0 * total - 1.0)
    return float(n / tau)


def _log_weights(S_centered: np.ndarray, delta: np.ndarray) -> np.ndarray:
    scores = S_centered @ delta
    return scores - logsumexp(scores)


def _maximize_ratio(S: np.ndarray, s_obs: np.ndarray) -> np.ndarray:
    """Maximize d -> d @ s_obs - log mean exp(S @ d); returns the step from
    the anchor.  Concave; Newton with backtracking."""
    M, p = S.shape
    center = S.mean(axis=0)
    Sc = S - center
    bc = s_obs - center
    delta = np.zeros(p)

    def value(d):
        return float(d @ bc) - float(logsumexp(Sc @ d)) + math.log(M)

    tol = 1e-9 * max(1.0, float(np.linalg.norm(bc)))
    for _ in range(200):
        logw = _log_weights(Sc, delta)
        w = np.exp(logw)
        mean = w @ Sc
        grad = bc - mean
        if float(np.linalg.norm(grad)) <= tol:
            break
        centered = Sc - mean
        cov = (centered * w[:, None]).T @ centered
        try:
            step = np.linalg.solve(cov + 1e-10 * np.eye(p), grad)
        except np.linalg.LinAlgError:
            step = grad
        base = value(delta)
        scale = 1.0
        while scale > 1e-14:
            cand = delta + scale * step
            if value(cand) >= base:
                delta = cand
                break
            scale *= 0.5
        else:
            break
    return delta


def _weighted_fisher(S: np.ndarray, delta: np.ndarray) -> tuple[np.ndarray, float]:
    """Statistic covariance under importance weights at anchor+delta, and
    the weight effective sample size."""
    center = S.mean(axis=0)
    Sc = S - center
    w = np.exp(_log_weights(Sc, delta))
    ess_w = 1.0 / float(np.sum(w**2))
    mean = w @ Sc
    centered = Sc - mean
    cov = (centered * w[:, None]).T @ centered
    return cov, ess_w


def _degenerate_columns(S: np.ndarray, names: list[str]) -> list[str]:
    spread = S.max(axis=0) - S.min(axis=0)
    return [name for name, s in zip(names, spread) if s == 0.0]


def _anchor_sizes(total: int, ramp: float, count: int) -> list[int]:
    sizes = []
    frac = ramp
    for _ in range(count):
        sizes.append(max(200, min(total, int(math.ceil(total * frac)))))
        frac = min(1.0, frac * 2.0)
    return sizes


def mcmcmle(
    spec: ModelSpec,
    net: BipartiteNetwork,
    attrs: Attributes,
    theta0=None,
    control: FitControl | None = None,
    formula: str | None = None,
) -> FitResult:
    """Monte-Carlo maximum likelihood with re-anchored importance sampling.

    At each anchor, networks are simulated, the observed statistics are
    checked against the convex hull of the simulated cloud (on violation
    the anchor step is halved back toward the previous anchor), and the
    log-likelihood-ratio surrogate is maximized to give the next anchor.
    The covariance comes from the inverse weighted statistic covariance
    at the estimate; the absolute log-likelihood from the zero-parameter
    bridge.
    """
    control = control or FitControl()
    model = bind(spec, net, attrs)
    s_obs = model.stats(net)
    if theta0 is None:
        theta = mple(spec, net, attrs).theta
    else:
        theta = np.asarray(theta0, dtype=np.float64)
        if theta.shape != (model.p,):
            raise ValueError(f"theta0 has shape {theta.shape}, model dimension {model.p}")
        if not np.all(np.isfinite(theta)):
            raise ValueError("theta0 must be finite")

    root = np.random.SeedSequence(control.sampler.seed)
    anchor_seeds = root.spawn(control.max_anchors)
    bridge_root = root.spawn(1)[0]
    sizes = _anchor_sizes(control.sampler.sample_size, control.ramp, control.max_anchors)

    prev_theta = None
    hull_failures = 0
    anchors_used = 0
    step_norm = math.inf
    last_sample = None
    last_delta = np.zeros(model.p)
    degenerate: set[str] = set()

    for a in range(control.max_anchors):
        ctl = replace(control.sampler, sample_size=sizes[a])
        sample = simulate(spec, attrs, theta, net, ctl, seed=anchor_seeds[a], model=model)
        anchors_used += 1
        S = sample.stats
        degenerate.update(_degenerate_columns(S, model.names))
        if hull_direction(S, s_obs) is not None:
            hull_failures += 1
            if hull_failures >= 5:
                raise NonConvergenceError(
                    f"observed statistics stayed outside the simulated hull after "
                    f"{hull_failures} re-anchors (anchor {np.round(theta, 4)})"
                )
            if prev_theta is not None:
                theta = 0.5 * (theta + prev_theta)
            continue
        delta = _maximize_ratio(S, s_obs)
        step_norm = float(np.linalg.norm(delta))
        prev_theta = theta
        theta = theta + delta
        last_sample = sample
        last_delta = delta
        at_full = sizes[a] >= control.sampler.sample_size
        if step_norm <= control.step_tol and at_full:
            break
        if control.noise_stop and at_full:
            fisher, ess_w = _weighted_fisher(S, delta)
            chain_ess = min(_effective_sample_size(S[:, j]) for j in range(model.p))
            eff = max(1.0, ess_w * chain_ess / S.shape[0])
            try:
                var_theta = np.diag(np.linalg.inv(fisher + 1e-10 * np.eye(model.p))) / eff
            except np.linalg.LinAlgError:
                var_theta = np.full(model.p, np.inf)
            if np.all(np.abs(delta) <= 2.0 * np.sqrt(np.clip(var_theta, 0.0, None))):
                break

    if last_sample is None:
        raise NonConvergenceError(
            "no anchor produced a usable sample (persistent hull violations)"
        )

    if degenerate:
        warnings.warn(
            DegeneracyWarning(
                "simulated chains produced near-constant statistics: "
                + ", ".join(sorted(degenerate))
            )
        )

    S = last_sample.stats
    fisher, ess_w = _weighted_fisher(S, last_delta)
    try:
        cov = np.linalg.inv(fisher)
    except np.linalg.LinAlgError:
        warnings.warn("singular estimated Fisher information; using pseudo-inverse")
        cov = np.linalg.pinv(fisher)
    cov = 0.5 * (cov + cov.T)

    loglik, loglik_sd = _bridge_loglik(
        spec, attrs, net, model, theta, s_obs, control, bridge_root
    )

    ess = {
        name: round(_effective_sample_size(S[:, j]), 1)
        for j, name in enumerate(model.names)
    }
    # Monte-Carlo noise of the estimate itself: inverse information scaled
    # by the effective number of importance draws
    ess_eff = max(1.0, ess_w * min(ess.values()) / S.shape[0])
    mc_sd = np.sqrt(np.clip(np.diag(cov), 0.0, None) / ess_eff)
    diagnostics = {
        "seed": control.sampler.seed,
        "rng": RNG_ALGORITHM,
        "anchors": anchors_used,
        "hull_failures": hull_failures,
        "final_step_norm": step_norm,
        "acceptance_rate": round(last_sample.acceptance_rate, 4),
        "ess": ess,
        "weight_ess": round(ess_w, 1),
        "ess_eff": round(ess_eff, 1),
        "mc_sd": [float(s) for s in mc_sd],
        "sample_size": S.shape[0],
        "warnings": sorted(degenerate),
        "control": (
            f"burn_in={control.sampler.burn_in} interval={control.sampler.interval} "
            f"sample_size={control.sampler.sample_size} proposal={control.sampler.proposal}"
        ),
    }
    return FitResult(
        method="mcmcmle",
        names=list(model.names),
        theta=theta,
        covariance=cov,
        loglik=loglik,
        loglik_sd=loglik_sd,
        diagnostics=diagnostics,
        formula=formula,
    )


def _bridge_loglik(
    spec: ModelSpec,
    attrs: Attributes,
    net: BipartiteNetwork,
    model: BoundModel,
    theta_hat: np.ndarray,
    s_obs: np.ndarray,
    control: FitControl,
    seed_root: np.random.SeedSequence,
) -> tuple[float, float]:
    """Absolute log-likelihood at theta_hat via a straight bridge from 0.

    log kappa(0) is exact (D log 2); each leg estimates one normalizer
    ratio from draws at the leg's left endpoint, with a batch-means
    variance that accounts for chain autocorrelation.
    """
    D = net.dyad_count
    legs = max(1, control.bridge_legs)
    interval = control.bridge_interval or max(1, control.sampler.interval // 4)
    seeds = seed_root.spawn(legs)
    path = np.linspace(0.0, 1.0, legs + 1)[:, None] * theta_hat[None, :]
    total = 0.0
    variance = 0.0
    current = net
    for leg in range(legs):
        th_a, th_b = path[leg], path[leg + 1]
        burn = (
            SamplerControl(seed=0).resolved_burn_in(D)
            if leg == 0
            else max(256, 2 * interval)
        )
        ctl = SamplerControl(
            burn_in=burn,
            interval=interval,
            sample_size=control.bridge_draws,
            proposal=control.sampler.proposal,
        )
        sample = simulate(spec, attrs, th_a, current, ctl, seed=seeds[leg], model=model)
        current = sample.final_network
        x = sample.stats @ (th_b - th_a)
        shift = float(x.max())
        r = np.exp(x - shift)
        mean_r = float(r.mean())
        total += shift + math.log(mean_r)
        nb = min(25, max(2, r.size // 40))
        bs = r.size // nb
        batch_means = r[: nb * bs].reshape(nb, bs).mean(axis=1)
        var_mean = float(batch_means.var(ddof=1)) / nb
        variance += var_mean / mean_r**2
    loglik = float(theta_hat @ s_obs) - D * math.log(2.0) - total
    return loglik, math.sqrt(variance)


# ---------------------------------------------------------------------------
# profile likelihood over the homophily exponent
# ---------------------------------------------------------------------------


@dataclass
class ProfilePoint:
    kind: str  # "alpha" or "beta"
    value: float
    fit: FitResult | None
    error: str | None = None


def profile(
    template: ModelSpec,
    which: str,
    grid,
    net: BipartiteNetwork,
    attrs: Attributes,
    control: FitControl | None = None,
    method: str = "mcmcmle",
) -> list[ProfilePoint]:
    """One fit per grid value of the unbound nodematch exponent.

    Per-point failures are recorded on the point and the grid continues.
    All log-likelihoods share the zero-parameter bridge reference, so
    they are comparable across points and across exponent kinds.
    """
    if template.unbound_index() is None:
        raise ValueError(
            "profile template must contain exactly one nodematch term "
            "without a bound exponent"
        )
    if method not in ("mple", "mcmcmle"):
        raise ValueError(f"method must be 'mple' or 'mcmcmle', got {method!r}")
    control = control or FitControl()
    grid = sorted(float(g) for g in grid)
    # one seed branch per (exponent kind, grid point), all off the root seed
    kind_root = np.random.SeedSequence(
        control.sampler.seed, spawn_key=(0 if which == "alpha" else 1,)
    )
    point_seeds = kind_root.spawn(len(grid))
    points: list[ProfilePoint] = []
    for value, seed_seq in zip(grid, point_seeds):
        spec_g = template.bind_exponent(which, value)
        try:
            if method == "mple":
                fit = mple(spec_g, net, attrs)
            else:
                point_seed = int(seed_seq.generate_state(1, np.uint64)[0] >> 1)
                ctl = replace(control, sampler=replace(control.sampler, seed=point_seed))
                fit = mcmcmle(spec_g, net, attrs, control=ctl)
            points.append(ProfilePoint(kind=which, value=value, fit=fit))
        except Exception as exc:  # per-point failures must not kill the grid
            points.append(
                ProfilePoint(
                    kind=which,
                    value=value,
                    fit=None,
                    error=f"{type(exc).__name__}: {exc}",
                )
            )
    return points
