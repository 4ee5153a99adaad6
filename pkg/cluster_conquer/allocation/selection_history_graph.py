"""Directed graph of candidate switches during a sequential allocation run"""
from typing import TYPE_CHECKING, List, Tuple

import networkx as nx

if TYPE_CHECKING:
    from cluster_conquer.allocation.Gba_Trace import Gba_Iteration


class Candidate_Switch:
    """
        Edge data for consecutive batches whose candidates are the edge endpoints
    """

    def __init__(self, prior: "Gba_Iteration", current: "Gba_Iteration"):
        self.iterations: List[int] = [current.iteration]
        self.bound_change: float = current.bound_raw - prior.bound_raw
        self.bound_increased: bool = self.bound_change > 0
        self.bound_decreased: bool = self.bound_change < 0

    def add(self, prior: "Gba_Iteration", current: "Gba_Iteration"):
        """
        :param prior: the earlier batch
        :param current: the later batch
        """
        self.iterations.append(current.iteration)
        self.bound_change += current.bound_raw - prior.bound_raw


class Selection_History:
    """
        Nodes are candidates selected at some batch, edges record the transitions between consecutive batches
    """

    def __init__(self):
        self.graph = nx.DiGraph()

    def add_candidate(self, tau: int) -> bool:
        """
        :param tau: candidate to add as node (if not already there)
        :return: True if node was added
        """
        if not self.graph.has_node(tau):
            self.graph.add_node(tau)
            return True
        return False

    def add_switch(self, prior: "Gba_Iteration", current: "Gba_Iteration") -> Tuple[Candidate_Switch, bool]:
        """
        Creates or extends the edge between the candidates of two consecutive batches
        :param prior: earlier batch
        :param current: later batch
        :return: the edge data and True if the edge is new
        """
        self.add_candidate(prior.tau_star)
        self.add_candidate(current.tau_star)
        new_edge = not self.graph.has_edge(prior.tau_star, current.tau_star)
        if new_edge:
            self.graph.add_edge(prior.tau_star, current.tau_star, edge_data=Candidate_Switch(prior, current))
        else:
            self._get_edge_data(prior.tau_star, current.tau_star).add(prior, current)
        return self._get_edge_data(prior.tau_star, current.tau_star), new_edge

    def _get_edge_data(self, prior: int, current: int) -> Candidate_Switch:
        return self.graph[prior][current]["edge_data"]

    @property
    def switch_count(self) -> int:
        """
        :return: transitions between different candidates
        """
        return sum(len(self._get_edge_data(a, b).iterations) for a, b in self.graph.edges if a != b)

    @property
    def candidates(self) -> List[int]:
        """
        :return: every candidate selected at some batch
        """
        return sorted(self.graph.nodes)
