from .config import Config, SigSpec, load_config, parse_sig_spec  # noqa: F401
from .fallback import fallback_model  # noqa: F401
from .formulas import (  # noqa: F401
    Constraint,
    ConstraintSystem,
    Model,
    smt_base,
    struct_base,
)
from .generate import (  # noqa: F401
    RL_OFFSET,
    Generator,
    generate_constraints,
    point_in,
    point_out,
)
