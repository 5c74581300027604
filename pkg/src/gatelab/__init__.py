"""Gate-level netlist reverse-engineering workbench.

Subsystems: the netlist model (`model`), serialization (`jsonio`, `verilog`),
the truth-table engine (`boolfn`), graph analyses (`graph`), state-machine
tooling and lock attacks (`fsm`), cycle simulation (`sim`), AES key recovery
(`aes`), replayable session logs (`trace`, `session`), the command channel
(`commands`), project generators (`generate`), and the HTTP service
(`service`).
"""

from . import errors
from .model import Netlist, lint
from .boolfn import BooleanFunction, from_lut_init, net_function
from .jsonio import (
    load_project,
    project_digest,
    read_json_netlist,
    save_project,
    write_json_netlist,
)
from .fsm import (
    HarpoonConfig,
    StateTransitionGraph,
    extract_stg,
    harpoon_obfuscate,
    distinguish_states,
    patch_initial_state,
    recover_enabling_key,
    synthesize_stg,
)
from .session import Session, replay
from .trace import EventLog, EventRecord, metrics

__version__ = "0.1.0"
