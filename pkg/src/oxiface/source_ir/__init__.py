from .ir import (  # noqa: F401
    Alloca,
    Assign,
    CallInstr,
    CondBr,
    Const,
    Deref,
    DropInstr,
    EltAddr,
    FieldAddr,
    Frag,
    FuncDef,
    GlobalDef,
    Goto,
    Instr,
    LabelSite,
    PhiInstr,
    Program,
    ReturnInstr,
    Rval,
    SourceType,
    StoreInstr,
    StructDef,
    UseInstr,
    Var,
    decl_of,
    type_labels,
)
from .parser import ParseError, parse_file, parse_program, rvals_of  # noqa: F401
from .printer import fmt_expr, fmt_instr, fmt_type, print_program  # noqa: F401
from .validate import ValidationError, has_unknowns, validate_program  # noqa: F401
from .cfg import (  # noqa: F401
    EXIT,
    Cfg,
    Liveness,
    build_cfg,
    live_blocks,
    liveness,
    postdom_nca,
    postdominators,
    var_uses,
)
from .drops import drop_points, insert_all_drops, insert_drops  # noqa: F401
from .rvals import (  # noqa: F401
    Cor,
    Path,
    TypingError,
    borrow_path,
    correspondences,
    deep_paths,
    rval_source_type,
)
