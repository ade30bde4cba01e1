"""Turing machine emulation by product update of finite S5 Kripke models."""

from .action import (
    DeterminismViolation,
    EpistemicProgram,
    applicable_designated,
    build_program,
    export_program,
    identity_program,
    import_program,
    product_update,
)
from .codec import (
    EncodedModel,
    Malformed,
    ceil_even,
    component_of_point,
    decode,
    encode,
    validate_encoding,
)
from .logic import (
    P,
    SYMBOL,
    TAPE_A,
    TAPE_B,
    TOP,
    Agent,
    Box,
    EquivRelation,
    Evaluator,
    Formula,
    FormulaSyntaxError,
    PointedKripkeModel,
    agent_universe,
    box,
    closure,
    conj,
    diamond,
    disj,
    eval_formula,
    format_formula,
    is_equivalence,
    make_model,
    neg,
    parse_formula,
    sat_set,
    state_agent,
)
from .machine import (
    HALTED,
    FiniteConfiguration,
    Halted,
    MachineFormatError,
    MachineSpec,
    OracleTrace,
    blank_config,
    configs_equivalent,
    normalize,
    parse_machine,
    run_oracle,
    step,
)
from .program import (
    ActionRole,
    CompiledProgram,
    PreconditionKind,
    all_kinds,
    compile_program,
    export_compiled,
    import_compiled,
    precondition,
)
from .runner import (
    RunReport,
    StepEntry,
    StepTrace,
    emulate,
    export_dot,
    export_trace_json,
    load_machine,
    verify_lockstep,
)

__version__ = "0.1.0"
