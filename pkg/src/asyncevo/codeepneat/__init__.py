from .assembly import AssembledNetwork, assemble_network, assemble_networks
from .evolution import attribute_fitness, evolve_population, merge_population
from .genomes import (
    BlueprintGenome,
    EdgeGene,
    Genome,
    InnovationRegistry,
    ModuleGenome,
    NodeGene,
    crossover_genomes,
    genome_distance,
    genome_record,
    new_blueprint,
    new_module,
)
from .runner import CdnConfig, CdnGenerationReport, CdnRunResult, CdnRunner, run_cdn
from .species import Speciation, Species
from .surrogate import SurrogateDomain, SurrogateProfile
