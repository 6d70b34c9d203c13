from .base import InvariantViolation, Machine, Transition
from .baseline import PSOMachine, SCMachine, TSOMachine
from .fm import FMMachine, Topology, default_topology, parse_topology, shared_topology
from .wmm import WMMMachine
from .wmms import WMMSMachine, coherence_graph, copy_allowed

MACHINES = {
    "SC": SCMachine,
    "TSO": TSOMachine,
    "PSO": PSOMachine,
    "WMM": WMMMachine,
    "WMM-S": WMMSMachine,
    "FM": FMMachine,
}


def make_machine(model_id: str, program, observed=None, topology=None, **options) -> Machine:
    try:
        cls = MACHINES[model_id]
    except KeyError:
        raise ValueError(f"no operational machine for model {model_id!r}") from None
    if topology is not None:
        if cls is not FMMachine:
            raise ValueError("a topology only applies to the FM model")
        options["topology"] = topology
    return cls(program, observed, **options)


__all__ = [
    "MACHINES", "make_machine", "Machine", "Transition", "InvariantViolation",
    "SCMachine", "TSOMachine", "PSOMachine", "WMMMachine", "WMMSMachine", "FMMachine",
    "Topology", "parse_topology", "default_topology", "shared_topology",
    "coherence_graph", "copy_allowed",
]
