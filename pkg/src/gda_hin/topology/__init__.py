from gda_hin.topology.hgt import (
    HgtConfig,
    HgtExtractor,
    HgtLayer,
    MessageGraph,
    NodeEmbeddings,
    TopoDiscriminator,
    extract,
    hgt_layer_forward,
    segment_softmax,
    topo_da_loss,
)

__all__ = [
    "HgtConfig",
    "HgtExtractor",
    "HgtLayer",
    "MessageGraph",
    "NodeEmbeddings",
    "TopoDiscriminator",
    "extract",
    "hgt_layer_forward",
    "segment_softmax",
    "topo_da_loss",
]
