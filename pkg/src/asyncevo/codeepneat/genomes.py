"""Graph genomes for the two coevolved populations.

Module genomes are DAGs of layer nodes (type + hyperparameter vector);
blueprint genomes are DAGs whose nodes point at module species. Structural
genes carry innovation ids so crossover can align homologous structure; the
registry hands out ids and replays them for identical structural events.
"""
from __future__ import annotations

import copy
from dataclasses import dataclass, field
from random import Random

LAYER_TYPES = ("dense", "lstm", "pooling", "concat")
HYPERPARAM_DIM = 2
HYPERPARAM_PERTURB_STD = 0.1


@dataclass
class NodeGene:
    innovation: int
    role: str  # "in", "out", or "hidden"
    layer_type: str | None = None  # modules only
    hyperparams: tuple[float, ...] = ()  # modules only
    species_pointer: int | None = None  # blueprints only


@dataclass
class EdgeGene:
    innovation: int
    src: int  # node innovation
    dst: int
    enabled: bool = True


class InnovationRegistry:
    """Per-population innovation bookkeeping.

    Identical structural events (same edge endpoints, same split edge) replay
    the same ids, so genes stay alignable across lineages.
    """

    def __init__(self, next_node: int, next_edge: int):
        self._next_node = next_node
        self._next_edge = next_edge
        self._edge_ids: dict[tuple[int, int], int] = {}
        self._split_ids: dict[int, tuple[int, int, int]] = {}

    def edge_id(self, src: int, dst: int) -> int:
        key = (src, dst)
        if key not in self._edge_ids:
            self._edge_ids[key] = self._next_edge
            self._next_edge += 1
        return self._edge_ids[key]

    def split_ids(self, edge_innovation: int) -> tuple[int, int, int]:
        """(new node id, incoming edge id, outgoing edge id) for splitting an edge."""
        if edge_innovation not in self._split_ids:
            node = self._next_node
            self._next_node += 1
            self._split_ids[edge_innovation] = (node, self._next_edge, self._next_edge + 1)
            self._next_edge += 2
        return self._split_ids[edge_innovation]


@dataclass
class Genome:
    """Shared DAG machinery for both genome kinds."""

    id: int
    nodes: dict[int, NodeGene]
    edges: dict[int, EdgeGene]
    fitness: float = 0.0

    @property
    def kind(self) -> str:
        raise NotImplementedError

    def clone(self, new_id: int) -> "Genome":
        dup = copy.deepcopy(self)
        dup.id = new_id
        return dup

    # -- graph helpers -------------------------------------------------------

    def enabled_edges(self) -> list[EdgeGene]:
        return [e for e in self.edges.values() if e.enabled]

    def in_node(self) -> int:
        return next(n.innovation for n in self.nodes.values() if n.role == "in")

    def out_node(self) -> int:
        return next(n.innovation for n in self.nodes.values() if n.role == "out")

    def successors(self) -> dict[int, list[int]]:
        adj: dict[int, list[int]] = {n: [] for n in self.nodes}
        for e in self.enabled_edges():
            adj[e.src].append(e.dst)
        return adj

    def is_connected(self) -> bool:
        """Output reachable from input over enabled edges."""
        adj = self.successors()
        stack = [self.in_node()]
        seen = set()
        target = self.out_node()
        while stack:
            n = stack.pop()
            if n == target:
                return True
            if n in seen:
                continue
            seen.add(n)
            stack.extend(adj[n])
        return False

    def _creates_cycle(self, src: int, dst: int) -> bool:
        # adding src->dst cycles iff src is reachable from dst (any edge, enabled or not)
        adj: dict[int, list[int]] = {n: [] for n in self.nodes}
        for e in self.edges.values():
            adj[e.src].append(e.dst)
        stack = [dst]
        seen = set()
        while stack:
            n = stack.pop()
            if n == src:
                return True
            if n in seen:
                continue
            seen.add(n)
            stack.extend(adj[n])
        return False

    def topological_order(self) -> list[int]:
        adj = self.successors()
        indeg = {n: 0 for n in self.nodes}
        for e in self.enabled_edges():
            indeg[e.dst] += 1
        ready = sorted(n for n, d in indeg.items() if d == 0)
        order = []
        while ready:
            n = ready.pop(0)
            order.append(n)
            for m in sorted(adj[n]):
                indeg[m] -= 1
                if indeg[m] == 0:
                    ready.append(m)
            ready.sort()
        return order

    # -- mutations ------------------------------------------------------------

    def _new_node_gene(self, innovation: int, rng: Random) -> NodeGene:
        raise NotImplementedError

    def mutate_add_node(self, registry: InnovationRegistry, rng: Random) -> None:
        """Split a random enabled edge into two edges through a fresh node."""
        candidates = sorted(self.enabled_edges(), key=lambda e: e.innovation)
        if not candidates:
            return
        edge = candidates[rng.randrange(len(candidates))]
        node_id, in_edge_id, out_edge_id = registry.split_ids(edge.innovation)
        if node_id in self.nodes:
            return  # this lineage already split that edge
        edge.enabled = False
        self.nodes[node_id] = self._new_node_gene(node_id, rng)
        self.edges[in_edge_id] = EdgeGene(in_edge_id, edge.src, node_id)
        self.edges[out_edge_id] = EdgeGene(out_edge_id, node_id, edge.dst)

    def mutate_add_edge(self, registry: InnovationRegistry, rng: Random) -> None:
        node_ids = sorted(self.nodes)
        existing = {(e.src, e.dst) for e in self.edges.values()}
        candidates = [
            (a, b)
            for a in node_ids
            for b in node_ids
            if a != b
            and (a, b) not in existing
            and self.nodes[a].role != "out"
            and self.nodes[b].role != "in"
            and not self._creates_cycle(a, b)
        ]
        if not candidates:
            return
        src, dst = candidates[rng.randrange(len(candidates))]
        eid = registry.edge_id(src, dst)
        if eid in self.edges:
            return
        self.edges[eid] = EdgeGene(eid, src, dst)

    def mutate_parameters(self, rng: Random, module_species_ids: list[int] | None = None) -> None:
        raise NotImplementedError


@dataclass
class ModuleGenome(Genome):
    @property
    def kind(self) -> str:
        return "module"

    def _new_node_gene(self, innovation: int, rng: Random) -> NodeGene:
        return NodeGene(
            innovation,
            role="hidden",
            layer_type=LAYER_TYPES[rng.randrange(len(LAYER_TYPES))],
            hyperparams=tuple(rng.random() for _ in range(HYPERPARAM_DIM)),
        )

    def mutate_parameters(self, rng: Random, module_species_ids: list[int] | None = None) -> None:
        node_ids = sorted(self.nodes)
        node = self.nodes[node_ids[rng.randrange(len(node_ids))]]
        node.hyperparams = tuple(
            min(1.0, max(0.0, h + rng.gauss(0.0, HYPERPARAM_PERTURB_STD))) for h in node.hyperparams
        )


@dataclass
class BlueprintGenome(Genome):
    @property
    def kind(self) -> str:
        return "blueprint"

    def _new_node_gene(self, innovation: int, rng: Random) -> NodeGene:
        return NodeGene(innovation, role="hidden", species_pointer=None)

    def mutate_parameters(self, rng: Random, module_species_ids: list[int] | None = None) -> None:
        if not module_species_ids:
            return
        node_ids = sorted(self.nodes)
        node = self.nodes[node_ids[rng.randrange(len(node_ids))]]
        node.species_pointer = module_species_ids[rng.randrange(len(module_species_ids))]

    def species_pointers(self) -> list[int]:
        return [n.species_pointer for n in self.nodes.values() if n.species_pointer is not None]

    def repair_pointers(self, module_species_ids: list[int], rng: Random) -> None:
        """Re-point nodes whose module species no longer exists."""
        valid = set(module_species_ids)
        for nid in sorted(self.nodes):
            node = self.nodes[nid]
            if node.species_pointer not in valid:
                node.species_pointer = module_species_ids[rng.randrange(len(module_species_ids))]


def new_module(genome_id: int, rng: Random, pending_pointer: int | None = None) -> ModuleGenome:
    nodes = {
        0: NodeGene(0, "in", LAYER_TYPES[rng.randrange(len(LAYER_TYPES))], tuple(rng.random() for _ in range(HYPERPARAM_DIM))),
        1: NodeGene(1, "out", LAYER_TYPES[rng.randrange(len(LAYER_TYPES))], tuple(rng.random() for _ in range(HYPERPARAM_DIM))),
    }
    edges = {0: EdgeGene(0, 0, 1)}
    return ModuleGenome(genome_id, nodes, edges)


def new_blueprint(genome_id: int, module_species_ids: list[int], rng: Random) -> BlueprintGenome:
    nodes = {
        0: NodeGene(0, "in", species_pointer=module_species_ids[rng.randrange(len(module_species_ids))]),
        1: NodeGene(1, "out", species_pointer=module_species_ids[rng.randrange(len(module_species_ids))]),
    }
    edges = {0: EdgeGene(0, 0, 1)}
    return BlueprintGenome(genome_id, nodes, edges)


def crossover_genomes(fitter: Genome, other: Genome, child_id: int, rng: Random) -> Genome:
    """NEAT-style crossover: matching genes from a random parent, the rest from the fitter."""
    child = fitter.clone(child_id)
    for eid in sorted(child.edges):
        if eid in other.edges and rng.randrange(2):
            child.edges[eid] = copy.deepcopy(other.edges[eid])
    for nid in sorted(child.nodes):
        if nid in other.nodes and rng.randrange(2):
            inherited = copy.deepcopy(other.nodes[nid])
            inherited.role = child.nodes[nid].role
            child.nodes[nid] = inherited
    child.fitness = 0.0
    if not child.is_connected():
        child = fitter.clone(child_id)  # crossover broke the input->output path
        child.fitness = 0.0
    return child


def genome_distance(a: Genome, b: Genome, c1: float = 1.0, c3: float = 0.4) -> float:
    """Structural mismatch plus mean parameter difference on matching node genes."""
    genes_a = set(a.nodes) | {-e - 1 for e in a.edges}
    genes_b = set(b.nodes) | {-e - 1 for e in b.edges}
    mismatched = len(genes_a ^ genes_b)
    max_genes = max(len(genes_a), len(genes_b), 1)
    matching_nodes = sorted(set(a.nodes) & set(b.nodes))
    diffs = []
    for nid in matching_nodes:
        na, nb = a.nodes[nid], b.nodes[nid]
        if na.hyperparams and nb.hyperparams:
            diffs.append(
                sum(abs(x - y) for x, y in zip(na.hyperparams, nb.hyperparams)) / len(na.hyperparams)
            )
        elif na.species_pointer is not None or nb.species_pointer is not None:
            diffs.append(0.0 if na.species_pointer == nb.species_pointer else 1.0)
    param_diff = sum(diffs) / len(diffs) if diffs else 0.0
    return c1 * mismatched / max_genes + c3 * param_diff


def genome_record(genome: Genome) -> str:
    """One-line structured text form (innovation-id lists) for run snapshots."""
    nodes = []
    for nid in sorted(genome.nodes):
        n = genome.nodes[nid]
        if n.species_pointer is not None or genome.kind == "blueprint":
            nodes.append(f"{nid}:{n.role}:s{n.species_pointer}")
        else:
            hp = ":".join(f"{h:.4f}" for h in n.hyperparams)
            nodes.append(f"{nid}:{n.role}:{n.layer_type}:{hp}")
    edges = [
        f"{eid}:{genome.edges[eid].src}>{genome.edges[eid].dst}:{'on' if genome.edges[eid].enabled else 'off'}"
        for eid in sorted(genome.edges)
    ]
    return (
        f"{genome.kind} {genome.id} fitness={genome.fitness:.6f} "
        f"nodes=({','.join(nodes)}) edges=({','.join(edges)})"
    )
