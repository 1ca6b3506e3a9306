"""Algebraic modeling layer with a solver abstraction and reference backends."""
from .attributes import (
    AttributeKey,
    ConstraintAttribute,
    ModelAttribute,
    OptimizerAttribute,
    VariableAttribute,
    register_attribute,
    unregister_attribute,
)
from .backend import (
    Backend,
    BackendCapabilities,
    CallbackContext,
    SolveResults,
    backend_apply,
    backend_load,
    callback_value,
    node_status,
    submit,
)
from .errors import *  # noqa: F401,F403
from .expr import AffExpr, QuadExpr, VariableRef, aff_add, aff_mul, aff_scale, evaluate, quicksum
from .model import (
    BoundRef,
    ConstraintRef,
    IntegralityRef,
    Model,
    OptimizerFactory,
    direct_model,
    optimizer_with_attributes,
    solution_summary,
)
from .sets import (
    Binary,
    Complements,
    EqualTo,
    GreaterEqual,
    Indicator,
    Integer,
    Interval,
    LessEqual,
    PSDCone,
    UserSet,
    register_set,
    unregister_set,
)
from .solvers.bnb import MILPBackend, pool_query
from .solvers.fw import FWBackend
from .solvers.simplex import SimplexBackend
from .status import CallbackKind, NodeStatus, ObjectiveSense, ResultStatus, TerminationStatus

MIN = ObjectiveSense.MIN
MAX = ObjectiveSense.MAX
