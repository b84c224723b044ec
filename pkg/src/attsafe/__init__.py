"""attsafe: constrained spacecraft attitude control.

CLF/CBF quadratic-program controllers with reaction-wheel torque and
momentum limits, a saturated-PD baseline, an energy-optimal open-loop
baseline, and the experiment harness driving them.
"""

from .controllers import (
    ControlOutput,
    ControllerConfig,
    make_controller,
    od_clf_cbf_qp,
    od_clf_qp,
    pd_saturated,
    res_clf_qp,
)
from .dynamics import (
    DisturbanceModel,
    PlantModel,
    SpacecraftState,
    drift,
    input_matrix,
    rk4_step,
    table1_model,
)
from .errors import (
    AttsafeError,
    CareSolverError,
    ConfigError,
    IntegrationError,
    SafetyViolationError,
    SimulationAborted,
)
from .fblin import LinearizationData, linearize, realize_input
from .mathcore import (
    CareProblem,
    CareSolution,
    euler321_to_mrp,
    mrp_kinematics_matrix,
    mrp_kinematics_matrix_dot,
    random_orientation,
    solve_care,
)
from .ocp import pareto_sweep, solve_ocp
from .qp import QpProblem, QpSolution, QpWeights, assemble_controller_qp, solve_qp
from .safety import CbfBounds, ClfBuilder, ClfData, build_clf, cbf_bounds, clf_terms, decay_w_minnorm, decay_w_res
from .sim import RunMetrics, Trajectory, compute_metrics, detect_t_final, run_closed_loop

__version__ = "0.1.0"
