import math

import numpy as np
import pytest
import torch
from torch.func import functional_call

from gda_hin.exceptions import ConfigError, ContractError
from gda_hin.hin.graph import DomainTag, HeteroGraph
from gda_hin.testing import ConstantDiscriminator, set_identity_parameters
from gda_hin.topology.hgt import (
    REVERSE_SUFFIX,
    HgtConfig,
    HgtExtractor,
    HgtLayer,
    MessageGraph,
    NodeEmbeddings,
    extract,
    hgt_layer_forward,
    segment_softmax,
    topo_da_loss,
)


def _graph(n: int, edges, dim: int = 4, seed: int = 0) -> HeteroGraph:
    rng = np.random.default_rng(seed)
    return HeteroGraph(
        domain_tag=DomainTag.SOURCE,
        node_counts={"N": n},
        features={"N": rng.normal(size=(n, dim))},
        edges={"N-N": edges},
    )


def _path(n: int, dim: int = 4) -> HeteroGraph:
    return _graph(n, [[i, i + 1] for i in range(n - 1)], dim=dim)


def _layer(dim: int = 4, heads: int = 2, activation: str = "gelu") -> HgtLayer:
    return HgtLayer(["N"], ["N-N"], hidden_dim=dim, num_heads=heads, dropout=0.0, activation=activation).double()


def _inputs(graph: HeteroGraph) -> dict[str, torch.Tensor]:
    return {t: torch.tensor(x) for t, x in graph.features.items()}


def _run(layer, graph, h=None):
    return layer(MessageGraph.from_graph(graph), h if h is not None else _inputs(graph))


# ---------------------------------------------------------------------------
# Config and message graph
# ---------------------------------------------------------------------------

class TestHgtConfig:
    def test_head_dim(self):
        assert HgtConfig(hidden_dim=64, num_heads=4).head_dim == 16

    @pytest.mark.parametrize("values", [dict(hidden_dim=10, num_heads=4), dict(num_heads=0), dict(num_layers=-1)])
    def test_invalid(self, values):
        with pytest.raises(ConfigError):
            HgtConfig(**values)


class TestMessageGraph:
    def test_both_directions(self):
        graph = MessageGraph.from_graph(_path(3))
        keys = [e.relation_key for e in graph.edges]
        assert keys == ["N-N", "N-N" + REVERSE_SUFFIX]
        forward, backward = graph.edges
        assert torch.equal(forward.src_index, backward.dst_index)
        assert torch.equal(forward.dst_index, backward.src_index)

    def test_in_degree_counts_both_directions(self):
        assert MessageGraph.from_graph(_path(3)).in_degree("N").tolist() == [1, 2, 1]

    def test_missing_relation_key(self):
        with pytest.raises(ConfigError, match="N-N"):
            MessageGraph.from_graph(_path(3), relation_keys={})

    def test_keys_follow_the_schema(self, small_pair):
        schema = small_pair.schema
        graph = MessageGraph.from_graph(
            small_pair.target,
            {t: schema.type_key(DomainTag.TARGET, t) for t in small_pair.target.node_types},
            {r: schema.relation_key(DomainTag.TARGET, r) for r in small_pair.target.edges},
        )
        assert graph.type_keys["F"] == "T~F"
        assert {e.relation_key for e in graph.edges} >= {"P-T~P-F", "P-T~P-F" + REVERSE_SUFFIX}


class TestSegmentSoftmax:
    def test_groups(self):
        scores = torch.tensor([[1.0], [2.0], [3.0]], dtype=torch.float64)
        weights = segment_softmax(scores, torch.tensor([0, 0, 1]), 2)
        expected = [math.exp(1) / (math.exp(1) + math.exp(2)), math.exp(2) / (math.exp(1) + math.exp(2)), 1.0]
        torch.testing.assert_close(weights[:, 0], torch.tensor(expected, dtype=torch.float64))

    def test_large_scores_stay_finite(self):
        weights = segment_softmax(torch.tensor([[1000.0], [1001.0]]), torch.tensor([0, 0]), 1)
        assert bool(torch.isfinite(weights).all())
        assert float(weights.sum()) == pytest.approx(1.0)


# ---------------------------------------------------------------------------
# Attention
# ---------------------------------------------------------------------------

class TestAttention:
    def test_single_neighbour_gets_all_the_weight(self):
        graph = _graph(2, [[0, 1]])
        index, weights, _ = _layer().attention(MessageGraph.from_graph(graph), _inputs(graph))["N"]
        assert torch.equal(weights, torch.ones_like(weights))
        assert sorted(index.tolist()) == [0, 1]

    def test_identical_keys_split_evenly(self):
        graph = _graph(3, [[1, 0], [2, 0]])
        h = _inputs(graph)
        h["N"][2] = h["N"][1]
        index, weights, _ = _layer().attention(MessageGraph.from_graph(graph), h)["N"]
        torch.testing.assert_close(weights[index == 0], torch.full((2, 2), 0.5, dtype=torch.float64))

    @pytest.mark.parametrize("seed", range(5))
    def test_weights_sum_to_one_per_node(self, seed):
        rng = np.random.default_rng(seed)
        graph = _graph(8, rng.integers(0, 8, size=(14, 2)), seed=seed)
        message_graph = MessageGraph.from_graph(graph)
        index, weights, _ = _layer().attention(message_graph, _inputs(graph))["N"]
        sums = torch.zeros(8, 2, dtype=torch.float64).index_add(0, index, weights)
        reached = message_graph.in_degree("N") > 0
        torch.testing.assert_close(sums[reached], torch.ones_like(sums[reached]))

    def test_matches_dense_oracle_with_identity_parameters(self):
        edges = [[0, 1], [1, 2], [2, 0], [3, 2]]
        graph = _graph(5, edges, dim=3, seed=1)
        layer = set_identity_parameters(_layer(dim=3, heads=1, activation="identity")).eval()
        out = _run(layer, graph)["N"].detach().numpy()

        x = graph.features["N"]
        incoming: dict[int, list[int]] = {}
        for u, v in edges:
            incoming.setdefault(v, []).append(u)
            incoming.setdefault(u, []).append(v)
        expected = x.copy()
        for v, sources in incoming.items():
            scores = np.array([x[v] @ x[u] for u in sources]) / math.sqrt(3)
            weights = np.exp(scores - scores.max())
            weights /= weights.sum()
            expected[v] = x[v] + sum(w * x[u] for w, u in zip(weights, sources))
        np.testing.assert_allclose(out, expected, atol=1e-12)
        np.testing.assert_array_equal(out[4], x[4])


# ---------------------------------------------------------------------------
# Layer behaviour
# ---------------------------------------------------------------------------

class TestHgtLayer:
    def test_shapes_are_preserved(self):
        graph = _path(6)
        out = _run(_layer(), graph)
        assert out["N"].shape == (6, 4)

    def test_isolated_node_passes_through(self):
        graph = _graph(4, [[0, 1], [1, 2]])
        h = _inputs(graph)
        assert torch.equal(_run(_layer(), graph, h)["N"][3], h["N"][3])

    def test_type_without_relations_passes_through(self):
        graph = HeteroGraph(
            domain_tag=DomainTag.SOURCE,
            node_counts={"N": 2, "M": 3},
            features={"N": np.ones((2, 4)), "M": np.arange(12.0).reshape(3, 4)},
            edges={"N-N": [[0, 1]]},
        )
        layer = HgtLayer(["N", "M"], ["N-N"], hidden_dim=4, num_heads=2, dropout=0.0).double()
        h = _inputs(graph)
        assert torch.equal(_run(layer, graph, h)["M"], h["M"])

    def test_missing_input_type(self):
        graph = _path(3)
        with pytest.raises(ContractError):
            _layer()(MessageGraph.from_graph(graph), {})

    def test_unknown_relation(self):
        layer = HgtLayer(["N"], ["X-X"], hidden_dim=4, num_heads=2).double()
        with pytest.raises(ConfigError, match="N-N"):
            _run(layer, _path(3))

    def test_unknown_type(self):
        layer = HgtLayer(["M"], ["N-N"], hidden_dim=4, num_heads=2).double()
        with pytest.raises(ConfigError, match="'N'"):
            _run(layer, _path(3))

    def test_permutation_equivariance(self):
        rng = np.random.default_rng(3)
        edges = rng.integers(0, 7, size=(12, 2))
        graph = _graph(7, edges)
        perm = rng.permutation(7)
        inverse = np.argsort(perm)
        permuted = HeteroGraph(
            domain_tag=DomainTag.SOURCE,
            node_counts={"N": 7},
            features={"N": graph.features["N"][perm]},
            edges={"N-N": inverse[edges]},
        )
        layer = _layer()
        out = _run(layer, graph)["N"]
        out_permuted = _run(layer, permuted)["N"]
        torch.testing.assert_close(out_permuted, out[torch.from_numpy(perm)])

    def test_gradcheck(self):
        graph = _graph(6, [[0, 1], [1, 2], [2, 3], [3, 4], [4, 5], [5, 0], [0, 3]], dim=4)
        message_graph = MessageGraph.from_graph(graph)
        layer = _layer()
        x = torch.tensor(graph.features["N"], requires_grad=True)
        assert torch.autograd.gradcheck(lambda t: layer(message_graph, {"N": t})["N"], (x,))

    def test_gradcheck_parameters(self):
        graph = _graph(6, [[0, 1], [1, 2], [2, 3], [3, 4], [4, 5], [5, 0], [0, 3]], dim=4)
        message_graph = MessageGraph.from_graph(graph)
        layer = _layer()
        inputs = {"N": torch.tensor(graph.features["N"])}
        names, values = zip(*((n, p.detach().clone().requires_grad_(True)) for n, p in layer.named_parameters()))

        def forward(*params):
            return functional_call(layer, dict(zip(names, params)), (message_graph, inputs))["N"]

        assert torch.autograd.gradcheck(forward, values)

    def test_hgt_layer_forward_wraps_embeddings(self):
        graph = _path(3)
        result = hgt_layer_forward(graph, NodeEmbeddings(DomainTag.SOURCE, _inputs(graph)), _layer())
        assert result.domain_tag is DomainTag.SOURCE
        assert result["N"].shape == (3, 4)


# ---------------------------------------------------------------------------
# Extractor
# ---------------------------------------------------------------------------

def _extractor(num_layers: int) -> HgtExtractor:
    config = HgtConfig(num_layers=num_layers, num_heads=2, hidden_dim=4, dropout=0.0)
    return HgtExtractor(config, ["N"], ["N-N"]).double()


class TestExtract:
    def test_gradcheck_all_parameters(self):
        graph = _graph(5, [[0, 1], [1, 2], [2, 3], [3, 4], [4, 0], [1, 3]], dim=4, seed=2)
        message_graph = MessageGraph.from_graph(graph)
        extractor = _extractor(2)
        inputs = {"N": torch.tensor(graph.features["N"])}
        names, values = zip(*((n, p.detach().clone().requires_grad_(True)) for n, p in extractor.named_parameters()))
        assert any(name.startswith("layers.1.") for name in names)

        def forward(*params):
            return functional_call(extractor, dict(zip(names, params)), (message_graph, inputs))["N"]

        assert torch.autograd.gradcheck(forward, values)

    def test_zero_layers_is_identity(self):
        graph = _path(4)
        initial = NodeEmbeddings(DomainTag.SOURCE, _inputs(graph))
        assert torch.equal(extract(graph, initial, _extractor(0))["N"], initial["N"])

    def test_two_layers_see_exactly_two_hops(self):
        graph = _path(6)
        extractor = _extractor(2)
        h = _inputs(graph)
        perturbed = {"N": h["N"].clone()}
        perturbed["N"][0] += 1.0
        base = extract(graph, NodeEmbeddings(DomainTag.SOURCE, h), extractor)["N"]
        moved = extract(graph, NodeEmbeddings(DomainTag.SOURCE, perturbed), extractor)["N"]
        assert torch.equal(base[3:], moved[3:])
        assert not torch.allclose(base[2], moved[2])
        assert not torch.allclose(base[1], moved[1])

    def test_star_leaves_reach_each_other_through_the_centre(self):
        graph = _graph(5, [[0, 1], [0, 2], [0, 3], [0, 4]])
        h = _inputs(graph)
        perturbed = {"N": h["N"].clone()}
        perturbed["N"][4] -= 2.0
        for layers, leaf_changes in ((1, False), (2, True)):
            extractor = _extractor(layers)
            base = extract(graph, NodeEmbeddings(DomainTag.SOURCE, h), extractor)["N"]
            moved = extract(graph, NodeEmbeddings(DomainTag.SOURCE, perturbed), extractor)["N"]
            assert not torch.allclose(base[0], moved[0])
            assert (not torch.equal(base[1], moved[1])) is leaf_changes

    def test_missing_initial_type(self):
        with pytest.raises(ContractError):
            extract(_path(3), NodeEmbeddings(DomainTag.SOURCE, {}), _extractor(1))

    def test_shared_parameters_across_domains(self, small_pair):
        schema = small_pair.schema
        type_keys = sorted({schema.type_key(DomainTag.SOURCE, t) for t in small_pair.source.node_types})
        relation_keys = [schema.relation_key(DomainTag.SOURCE, r) for r in small_pair.source.edges]
        extractor = HgtExtractor(HgtConfig(num_layers=2, num_heads=2, hidden_dim=4, dropout=0.0), type_keys, relation_keys)
        extractor = extractor.double()
        for domain in DomainTag:
            graph = small_pair.graph(domain)
            h = {t: torch.randn(n, 4, dtype=torch.float64) for t, n in graph.node_counts.items()}
            out = extract(
                graph,
                NodeEmbeddings(domain, h),
                extractor,
                {t: schema.type_key(domain, t) for t in graph.node_types},
                {r: schema.relation_key(domain, r) for r in graph.edges},
            )
            assert {t: tuple(x.shape) for t, x in out.embeddings.items()} == {t: (n, 4) for t, n in graph.node_counts.items()}

    def test_restricted_outputs_match_the_full_pass(self, small_pair):
        schema, graph = small_pair.schema, small_pair.source
        type_keys = {t: schema.type_key(DomainTag.SOURCE, t) for t in graph.node_types}
        relation_keys = {r: schema.relation_key(DomainTag.SOURCE, r) for r in graph.edges}
        config = HgtConfig(num_layers=2, num_heads=2, hidden_dim=4, dropout=0.0)
        extractor = HgtExtractor(config, sorted(type_keys.values()), list(relation_keys.values())).double()
        message_graph = MessageGraph.from_graph(graph, type_keys, relation_keys)
        h = {t: torch.randn(n, 4, dtype=torch.float64) for t, n in graph.node_counts.items()}

        full = extractor(message_graph, h)
        restricted = extractor(message_graph, h, outputs={"A", "T"})
        assert set(restricted) == {"A", "T"}
        for node_type, x in restricted.items():
            torch.testing.assert_close(x, full[node_type])
        assert set(extractor.layers[-1].attention(message_graph, h, dst_types={"A"})) == {"A"}

    def test_restricted_outputs_without_layers(self):
        graph = _path(3)
        h = _inputs(graph)
        message_graph = MessageGraph.from_graph(graph)
        assert list(_extractor(0)(message_graph, h, outputs={"N"})) == ["N"]
        assert _extractor(0)(message_graph, h, outputs=set()) == {}


class TestTopoDaLoss:
    def test_half_discriminator_gives_ln2(self):
        loss = topo_da_loss(torch.randn(3, 4), torch.randn(5, 4), ConstantDiscriminator(0.5))
        assert float(loss) == pytest.approx(math.log(2), abs=1e-6)
