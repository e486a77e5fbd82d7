"""Assembling evaluable networks out of blueprints and module species."""
from __future__ import annotations

from dataclasses import dataclass, field
from random import Random

from .genomes import BlueprintGenome, ModuleGenome
from .species import Speciation


@dataclass
class AssembledNetwork:
    """Flattened layer DAG plus the provenance needed for disassembly."""

    uid: int
    nodes: list[tuple[str, tuple[float, ...]]]  # (layer_type, hyperparams)
    edges: list[tuple[int, int]]  # flat node indexes
    blueprint_id: int
    node_modules: dict[int, int]  # blueprint node innovation -> module genome id
    input_index: int
    output_index: int

    @property
    def node_count(self) -> int:
        return len(self.nodes)

    def genome_ids(self) -> list[int]:
        """Every blueprint/module genome participating in this network."""
        return [self.blueprint_id] + sorted(set(self.node_modules.values()))

    def features(self) -> tuple[float, float, tuple[float, ...], float]:
        """(depth, node count, layer-type histogram, mean fan-in) of the layer DAG."""
        from .genomes import LAYER_TYPES

        n = len(self.nodes)
        adj: list[list[int]] = [[] for _ in range(n)]
        indeg = [0] * n
        for src, dst in self.edges:
            adj[src].append(dst)
            indeg[dst] += 1
        # longest path in node count (DAG; edges were built in topological order)
        longest = [1] * n
        order = [i for i in range(n) if indeg[i] == 0]
        seen_deg = list(indeg)
        idx = 0
        while idx < len(order):
            u = order[idx]
            idx += 1
            for v in adj[u]:
                longest[v] = max(longest[v], longest[u] + 1)
                seen_deg[v] -= 1
                if seen_deg[v] == 0:
                    order.append(v)
        depth = float(max(longest)) if longest else 0.0
        hist_counts = {t: 0 for t in LAYER_TYPES}
        for layer_type, _ in self.nodes:
            hist_counts[layer_type] += 1
        hist = tuple(hist_counts[t] / n for t in LAYER_TYPES)
        fan_ins = [d for d in indeg if d > 0]
        mean_fan_in = sum(fan_ins) / len(fan_ins) if fan_ins else 0.0
        return depth, float(n), hist, mean_fan_in

    def describe(self) -> str:
        mods = ",".join(f"{k}:{v}" for k, v in sorted(self.node_modules.items()))
        return f"net{self.uid}[bp{self.blueprint_id};{mods};nodes={self.node_count}]"


def assemble_network(
    uid: int,
    blueprint: BlueprintGenome,
    speciation: Speciation,
    modules_by_id: dict[int, ModuleGenome],
    rng: Random,
) -> AssembledNetwork:
    """Replace each blueprint node with a module drawn from the pointed species.

    Within one assembly, identical species pointers resolve to the same sampled
    module. A pointer to a species that no longer exists is repaired on the
    spot by re-pointing to a uniformly random existing species.
    """
    species_by_id = {sp.id: sp for sp in speciation.species}
    existing_ids = sorted(species_by_id)
    if not existing_ids:
        raise ValueError("cannot assemble: no module species exist")
    chosen_module: dict[int, ModuleGenome] = {}

    def module_for(pointer: int | None) -> tuple[int, ModuleGenome]:
        sid = pointer
        if sid not in species_by_id:
            sid = existing_ids[rng.randrange(len(existing_ids))]
        if sid not in chosen_module:
            members = species_by_id[sid].members
            chosen_module[sid] = modules_by_id[members[rng.randrange(len(members))]]
        return sid, chosen_module[sid]

    flat_nodes: list[tuple[str, tuple[float, ...]]] = []
    flat_edges: list[tuple[int, int]] = []
    instance_in: dict[int, int] = {}
    instance_out: dict[int, int] = {}
    node_modules: dict[int, int] = {}

    bp_order = blueprint.topological_order()
    for bp_node_id in bp_order:
        pointer = blueprint.nodes[bp_node_id].species_pointer
        _, module = module_for(pointer)
        node_modules[bp_node_id] = module.id
        local_index: dict[int, int] = {}
        for mid in module.topological_order():
            mnode = module.nodes[mid]
            local_index[mid] = len(flat_nodes)
            flat_nodes.append((mnode.layer_type, mnode.hyperparams))
        for e in sorted(module.enabled_edges(), key=lambda e: e.innovation):
            flat_edges.append((local_index[e.src], local_index[e.dst]))
        instance_in[bp_node_id] = local_index[module.in_node()]
        instance_out[bp_node_id] = local_index[module.out_node()]
    for e in sorted(blueprint.enabled_edges(), key=lambda e: e.innovation):
        flat_edges.append((instance_out[e.src], instance_in[e.dst]))

    return AssembledNetwork(
        uid=uid,
        nodes=flat_nodes,
        edges=flat_edges,
        blueprint_id=blueprint.id,
        node_modules=node_modules,
        input_index=instance_in[bp_order[0]],
        output_index=instance_out[bp_order[-1]],
    )


def assemble_networks(
    count: int,
    start_uid: int,
    blueprints: list[BlueprintGenome],
    speciation: Speciation,
    modules_by_id: dict[int, ModuleGenome],
    rng: Random,
) -> list[AssembledNetwork]:
    """Sample `count` networks, one uniformly drawn blueprint each."""
    nets = []
    for k in range(count):
        bp = blueprints[rng.randrange(len(blueprints))]
        nets.append(assemble_network(start_uid + k, bp, speciation, modules_by_id, rng))
    return nets
