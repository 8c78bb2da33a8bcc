"""Phylogenetic inference pipelines over allelic profiles and sequences."""

from .correction import jukes_cantor
from .dataset import Dataset, Profile, read_fasta, read_ml, read_snp
from .distance import build_matrix
from .errors import DataError, DomainError, ErrorKind, ParseError, WorkflowError
from .gcp import run_gcp
from .lbr import run_lbr
from .matrix import DistanceMatrix, read_matrix, write_matrix
from .mst import run_edmonds, run_goeburst
from .nj import run_nj
from .tree import Edge, Tree, read_newick, read_nexus, write_newick, write_nexus

__all__ = [
    "DataError", "Dataset", "DistanceMatrix", "DomainError", "Edge", "ErrorKind",
    "ParseError", "Profile", "Tree", "WorkflowError", "build_matrix", "jukes_cantor",
    "read_fasta", "read_matrix", "read_ml", "read_newick", "read_nexus", "read_snp",
    "run_edmonds", "run_gcp", "run_goeburst", "run_lbr", "run_nj", "write_matrix",
    "write_newick", "write_nexus",
]

__version__ = "0.1.0"
