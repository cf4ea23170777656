# topology.py – edge -> fog -> cloud link graph used for hop and bandwidth accounting

from __future__ import annotations

import networkx as nx

from core.views import Layer, LayerSpecs


def build_topology(specs: LayerSpecs) -> nx.DiGraph:
    """One node per layer; each link carries the RTT and bandwidth of the layer it leads to."""
    graph = nx.DiGraph()
    for spec in specs:
        graph.add_node(spec.layer, label=spec.layer.label, spec=spec)
    for upstream, downstream in ((Layer.EDGE, Layer.FOG), (Layer.FOG, Layer.CLOUD)):
        target = specs.get(downstream)
        graph.add_edge(upstream, downstream, rtt=target.base_rtt, bandwidth=target.bandwidth)
    return graph


def route(graph: nx.DiGraph, layer: Layer) -> list[tuple[Layer, Layer]]:
    """Links a payload crosses from the device to `layer`."""
    path = nx.shortest_path(graph, Layer.EDGE, layer)
    return list(zip(path, path[1:]))


def hop_count(graph: nx.DiGraph, layer: Layer) -> int:
    return nx.shortest_path_length(graph, Layer.EDGE, layer)
