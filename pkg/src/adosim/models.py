"""Likelihood families exposed through one finite-response interface.

Four paradigms are built in: a one-parameter item-response model with a
guessing floor, power-law and exponential retention curves, and a pair of
Gaussian models distinguished only by their response spread. Each is
packaged as a :class:`ResponseModel` holding precomputed likelihood tables
over (parameter grid x stimulus space x response space).
"""

from __future__ import annotations

import numpy as np
from scipy import stats

from .dist import discretize_beta, midpoint_grid

# Item discrimination is a fixed constant of the paradigm, not a knob.
IRT_DISCRIMINATION = 2.72
IRT_GUESS_FLOOR = 0.2

GAUSS_SD = {"gauss-a": 10.0, "gauss-b": 11.0}
GAUSS_STIMULUS = 0.0

ROW_TOL = 1e-12


def irt_likelihood(x, theta):
    """Probability of a correct response to an item of difficulty `x`.

    0.2 + 0.8 / (1 + exp(-2.72 (theta - x))): a logistic in proficiency
    with a guessing floor of 0.2. Accepts scalars or broadcastable arrays.
    """
    return IRT_GUESS_FLOOR + (1.0 - IRT_GUESS_FLOOR) / (
        1.0 + np.exp(-IRT_DISCRIMINATION * (np.asarray(theta) - np.asarray(x)))
    )


def pow_likelihood(x, a, b):
    """Power-law recall probability a (x + 1)^(-b) after a delay of `x` seconds."""
    return np.asarray(a) * (np.asarray(x) + 1.0) ** (-np.asarray(b))


def exp_likelihood(x, a, b):
    """Exponential recall probability a exp(-b x) after a delay of `x` seconds."""
    return np.asarray(a) * np.exp(-np.asarray(b) * np.asarray(x))


class ResponseModel:
    """A named likelihood family on finite stimulus, response and parameter grids.

    Parameters
    ----------
    model_id : str
        Identifier used in beliefs and configs.
    stimulus_space : sequence
        Ordered stimulus values.
    response_space : sequence
        Ordered response atoms.
    param_grid : sequence
        Ordered parameter atoms (floats or tuples of floats).
    likelihoods : ndarray, shape (n_params, n_stimuli, n_responses)
        p(y | x, theta); every row must be a distribution over responses.
    param_names : tuple of str
        Axis names for the parameter atoms.
    """

    __slots__ = (
        "id", "stimulus_space", "response_space", "param_grid", "param_names",
        "lik", "log_lik", "nce", "_stim_index", "_resp_index", "_param_index",
    )

    def __init__(self, model_id, stimulus_space, response_space, param_grid,
                 likelihoods, param_names):
        self.id = str(model_id)
        self.stimulus_space = tuple(stimulus_space)
        self.response_space = tuple(response_space)
        self.param_grid = tuple(param_grid)
        self.param_names = tuple(param_names)

        lik = np.asarray(likelihoods, dtype=float)
        expected = (len(self.param_grid), len(self.stimulus_space), len(self.response_space))
        if lik.shape != expected:
            raise ValueError(f"likelihood table has shape {lik.shape}, expected {expected}")
        if np.any(lik < 0) or np.any(lik > 1):
            raise ValueError("likelihoods must lie in [0, 1]")
        row_sums = lik.sum(axis=2)
        if np.any(np.abs(row_sums - 1.0) > ROW_TOL):
            raise ValueError("response masses must sum to 1 for every (x, theta)")

        lik.setflags(write=False)
        self.lik = lik
        with np.errstate(divide="ignore"):
            log_lik = np.where(lik > 0, np.log(np.where(lik > 0, lik, 1.0)), -np.inf)
        log_lik.setflags(write=False)
        self.log_lik = log_lik
        # negative conditional response entropy per (theta, x); the 0 ln 0
        # convention is exact here because zero entries are masked out
        nce = np.sum(lik * np.where(lik > 0, log_lik, 0.0), axis=2)
        nce.setflags(write=False)
        self.nce = nce

        self._stim_index = {s: i for i, s in enumerate(self.stimulus_space)}
        self._resp_index = {r: i for i, r in enumerate(self.response_space)}
        self._param_index = {p: i for i, p in enumerate(self.param_grid)}

    def __repr__(self):
        return (f"ResponseModel({self.id!r}, {len(self.param_grid)} params, "
                f"{len(self.stimulus_space)} stimuli, {len(self.response_space)} responses)")

    def stimulus_index(self, x) -> int:
        try:
            return self._stim_index[x]
        except KeyError:
            raise KeyError(f"stimulus {x!r} not in the space of model {self.id!r}") from None

    def response_index(self, y) -> int:
        try:
            return self._resp_index[y]
        except KeyError:
            raise KeyError(f"response {y!r} not in the space of model {self.id!r}") from None

    def param_index(self, theta) -> int:
        try:
            return self._param_index[theta]
        except KeyError:
            raise KeyError(f"parameter {theta!r} not on the grid of model {self.id!r}") from None

    def likelihood_row(self, x, theta) -> np.ndarray:
        """p(y | x, theta) over the response space."""
        return self.lik[self.param_index(theta), self.stimulus_index(x), :]

    def likelihood(self, y, x, theta) -> float:
        return float(self.likelihood_row(x, theta)[self.response_index(y)])


def theta_grid(lo: float = -3.0, hi: float = 3.0, n: int = 31) -> tuple:
    """Equally spaced proficiency/difficulty levels, endpoints included."""
    return tuple(float(v) for v in np.linspace(lo, hi, n))


def irt_model(grid=None) -> ResponseModel:
    """Item-response model; the stimulus space doubles as the parameter grid."""
    grid = theta_grid() if grid is None else tuple(grid)
    thetas = np.asarray(grid)
    xs = np.asarray(grid)
    p1 = irt_likelihood(xs[None, :], thetas[:, None])
    lik = np.stack([1.0 - p1, p1], axis=2)
    return ResponseModel("irt", grid, (0, 1), grid, lik, ("theta",))


def retention_param_grid(n_cells: int = 50) -> tuple:
    """(a, b) pairs on a midpoint grid of the unit square, row-major in a."""
    mids = midpoint_grid(n_cells)
    return tuple((a, b) for a in mids for b in mids)


def _retention_model(model_id, fn, delay_max, n_cells):
    stimuli = tuple(range(delay_max + 1))
    grid = retention_param_grid(n_cells)
    a = np.asarray([g[0] for g in grid])
    b = np.asarray([g[1] for g in grid])
    xs = np.asarray(stimuli, dtype=float)
    p1 = fn(xs[None, :], a[:, None], b[:, None])
    lik = np.stack([1.0 - p1, p1], axis=2)
    return ResponseModel(model_id, stimuli, (0, 1), grid, lik, ("a", "b"))


def pow_model(delay_max: int = 100, n_cells: int = 50) -> ResponseModel:
    """Power-law retention over integer delays 0..delay_max."""
    return _retention_model("pow", pow_likelihood, delay_max, n_cells)


def exp_model(delay_max: int = 100, n_cells: int = 50) -> ResponseModel:
    """Exponential retention over integer delays 0..delay_max."""
    return _retention_model("exp", exp_likelihood, delay_max, n_cells)


def integer_grid(lo: int, hi: int) -> tuple:
    return tuple(float(v) for v in range(lo, hi + 1))


def gaussian_model(model_id: str, mu_grid=None, y_bins=None) -> ResponseModel:
    """One of the Gaussian pair: mean on a grid, fixed model-specific spread.

    Responses are binned; masses are the normal density at the bin centers,
    renormalized per mean. Both models answer a single dummy stimulus.
    """
    sd = GAUSS_SD[model_id]
    mu_grid = integer_grid(-20, 20) if mu_grid is None else tuple(mu_grid)
    y_bins = integer_grid(-40, 40) if y_bins is None else tuple(y_bins)
    mus = np.asarray(mu_grid)
    centers = np.asarray(y_bins)
    dens = stats.norm.pdf(centers[None, :], loc=mus[:, None], scale=sd)
    lik = (dens / dens.sum(axis=1, keepdims=True))[:, None, :]
    return ResponseModel(model_id, (GAUSS_STIMULUS,), y_bins, mu_grid, lik, ("mu",))


def make_model(model_id: str, *, grid=None, delay_max: int = 100,
               n_cells: int = 50, mu_grid=None, y_bins=None) -> ResponseModel:
    """Build a model from its registry identifier."""
    if model_id == "irt":
        return irt_model(grid)
    if model_id == "pow":
        return pow_model(delay_max, n_cells)
    if model_id == "exp":
        return exp_model(delay_max, n_cells)
    if model_id in GAUSS_SD:
        return gaussian_model(model_id, mu_grid, y_bins)
    raise ValueError(f"unknown model id {model_id!r}")


def retention_prior(model: ResponseModel, a_shape, b_shape):
    """Product Beta prior over a retention model's (a, b) grid.

    `a_shape` and `b_shape` are (alpha, beta) pairs; masses follow the
    densities at the grid midpoints, renormalized, and are returned aligned
    with the model's row-major parameter ordering.
    """
    n = int(round(np.sqrt(len(model.param_grid))))
    da = discretize_beta(*a_shape, n)
    db = discretize_beta(*b_shape, n)
    from .dist import product_dist

    d = product_dist(da, db)
    if d.support != model.param_grid:
        raise ValueError("prior grid does not match the model's parameter grid")
    return d
