import numpy as np
import pytest

from alleelab.model import Params

# Parameter sets of the reference one- and two-parameter studies.
FIG2_KW = dict(r=0.5, k=6.79211, q=0.3, a=3.0, s=0.1096, n=6.752, m=0.2, c=0.001)
FIG6_KW = dict(r=0.65, k=1.64445, q=0.25, a=0.8, s=0.03, m=0.3855, c=0.01)


@pytest.fixture(scope="session")
def fig2_params():
    return Params(b=0.5, **FIG2_KW)


@pytest.fixture(scope="session")
def fig6_params():
    # b and n vary in the (n, b) plane study; these are the fixed values
    return Params(b=0.6, n=3.0, **FIG6_KW)


def random_feasible_params(rng: np.random.Generator) -> Params:
    a = rng.uniform(0.3, 4.0)
    return Params(
        r=rng.uniform(0.1, 2.0),
        s=rng.uniform(0.02, 0.6),
        k=rng.uniform(1.0, 10.0),
        q=rng.uniform(0.05, 1.0),
        a=a,
        n=rng.uniform(0.5, 8.0),
        m=rng.uniform(0.05, 1.0),
        b=rng.uniform(0.1, 2.0),
        c=rng.uniform(-0.5, 1.0) * np.sqrt(a),
    )


@pytest.fixture(scope="session")
def fig2_eq_branch(fig2_params):
    from alleelab import continuation as ct
    from alleelab import equilibria as eq

    e = eq.positive_equilibria(fig2_params)[0]
    return ct.continue_equilibrium(fig2_params, e, "b", (0.05, 1.2))


@pytest.fixture(scope="session")
def fig2_mushroom(fig2_params, fig2_eq_branch):
    from alleelab import continuation as ct
    from alleelab import cycles as cy

    hopfs = [s for s in fig2_eq_branch.specials if s.kind is ct.SpecialKind.HOPF]
    h2 = max(hopfs, key=lambda s: s.param)
    seed = ct.switch_to_cycle(fig2_eq_branch, h2, fig2_params)
    return cy.continue_cycle(seed, "b", (0.05, 1.2))
