"""Exact computations in Leavitt path algebras of graphs with disjoint cycles."""

from importlib import resources

from .graph import Graph, parse_graph

__all__ = ["Graph", "parse_graph", "corpus_names", "load_corpus"]


def corpus_names() -> list[str]:
    files = resources.files(__package__).joinpath("corpus").iterdir()
    return sorted(f.name[: -len(".graph")] for f in files if f.name.endswith(".graph"))


def load_corpus(name: str) -> Graph:
    """Load one of the shipped graphs (``fig1``, ``fig3``, ``toeplitz``, ...)."""
    path = resources.files(__package__).joinpath("corpus", f"{name}.graph")
    if not path.is_file():
        raise FileNotFoundError(f"no corpus graph named {name!r}; have {corpus_names()}")
    return parse_graph(path.read_text())
