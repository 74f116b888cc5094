#include <gtest/gtest.h>

#include "clustersync/clustersync.hpp"

using namespace clustersync;

namespace {

std::string schema_field(const std::string& text)
{
    try {
        parse_config_text(text);
    } catch (const SchemaError& e) {
        return e.field();
    }
    return "<accepted>";
}

} // namespace

TEST(Config, EmptyDocumentGivesDefaults)
{
    const auto c = parse_config_text("{}");
    EXPECT_EQ(c.seed, 1u);
    EXPECT_EQ(c.reduction.order, 20u);
    EXPECT_EQ(c.topology.form, "distance-weighted");
    EXPECT_EQ(c.interaction.source, "compute");
    EXPECT_FALSE(c.pulse.has_value());
}

TEST(Config, FullDocumentParses)
{
    const auto c = parse_config_text(R"({
        "command": "perturb", "seed": 9, "output_dir": "runs/a",
        "oscillator": {"model": "morris_lecar", "e_syn": 0.0, "params": {"i_app": 0.09}},
        "reduction": {"sample_count": 2048, "grid_size": 256, "order": 12},
        "topology": {"form": "circulant", "weights": [0, 1, 0.5, 0.25]},
        "solution": {"q": 1},
        "interaction": {"source": "printed-reference", "period": 23.87},
        "coupling": {"g_syn": 0.003, "sign": "negative"},
        "tau": {"value": 8, "max": 30, "grid": 600},
        "simulation": {"horizon_periods": 50, "step": 0.02, "initial": "random-constant", "jitter": 0.01},
        "pulse": {"targets": [1, 3], "amplitude": 0.005, "window": [600, 650]}
    })");
    EXPECT_EQ(c.command, "perturb");
    EXPECT_EQ(c.seed, 9u);
    EXPECT_EQ(*c.oscillator.e_syn, 0.0);
    EXPECT_DOUBLE_EQ(c.oscillator.morris_lecar.i_app, 0.09);
    EXPECT_EQ(c.reduction.grid_size, 256u);
    EXPECT_EQ(c.topology.N, 4);
    EXPECT_EQ(*c.solution.q, 1);
    EXPECT_EQ(c.coupling.sign, CouplingSign::negative);
    EXPECT_DOUBLE_EQ(coupling_strength(c.coupling, 4), 0.001);
    EXPECT_EQ(c.tau.grid, 600u);
    EXPECT_EQ(c.simulation.initial, "random-constant");
    ASSERT_TRUE(c.pulse.has_value());
    EXPECT_EQ(c.pulse->targets, (std::vector<int>{1, 3}));
    EXPECT_EQ(c.pulse->t_end, 650.0);
}

TEST(Config, UnknownKeysNameTheField)
{
    EXPECT_EQ(schema_field(R"({"sed": 1})"), "sed");
    EXPECT_EQ(schema_field(R"({"tau": {"vlaue": 3}})"), "tau.vlaue");
    EXPECT_EQ(schema_field(R"({"oscillator": {"params": {"gca": 1}}})"), "oscillator.params.gca");
}

TEST(Config, WrongTypesNameTheField)
{
    EXPECT_EQ(schema_field(R"({"seed": "one"})"), "seed");
    EXPECT_EQ(schema_field(R"({"seed": 1.5})"), "seed");
    EXPECT_EQ(schema_field(R"({"tau": {"value": "8"}})"), "tau.value");
    EXPECT_EQ(schema_field(R"({"topology": {"weights": [0, "a"]}})"), "topology.weights");
    EXPECT_EQ(schema_field(R"({"simulation": {"perturb_delays": 1}})"), "simulation.perturb_delays");
    EXPECT_EQ(schema_field(R"({"tau": 3})"), "tau");
}

TEST(Config, OutOfRangeValuesNameTheField)
{
    EXPECT_EQ(schema_field(R"({"seed": -1})"), "seed");
    EXPECT_EQ(schema_field(R"({"tau": {"value": -1}})"), "tau.value");
    EXPECT_EQ(schema_field(R"({"tau": {"max": 0}})"), "tau.max");
    EXPECT_EQ(schema_field(R"({"tau": {"grid": 1}})"), "tau.grid");
    EXPECT_EQ(schema_field(R"({"topology": {"N": 1}})"), "topology.N");
    EXPECT_EQ(schema_field(R"({"topology": {"N": 3, "weights": [0, 1]}})"), "topology.N");
    EXPECT_EQ(schema_field(R"({"topology": {"form": "star", "N": 4}})"), "topology.form");
    EXPECT_EQ(schema_field(R"({"topology": {"form": "circulant", "N": 4}})"), "topology.weights");
    EXPECT_EQ(schema_field(R"({"simulation": {"step": 0}})"), "simulation.step");
    EXPECT_EQ(schema_field(R"({"simulation": {"tol_fraction": 0.6}})"), "simulation.tol_fraction");
    EXPECT_EQ(schema_field(R"({"simulation": {"initial": "constant"}})"), "simulation.constant_states");
    EXPECT_EQ(schema_field(R"({"command": "fly"})"), "command");
    EXPECT_EQ(schema_field(R"({"coupling": {"sign": "up"}})"), "coupling.sign");
    EXPECT_EQ(schema_field(R"({"reduction": {"sample_count": 8}})"), "reduction.sample_count");
}

TEST(Config, ConflictingChoicesRejected)
{
    EXPECT_EQ(schema_field(R"({"coupling": {"epsilon": 0.1, "g_syn": 0.2}})"), "coupling.g_syn");
    EXPECT_EQ(schema_field(R"({"solution": {"q": 1, "alternating": "A"}})"), "solution.alternating");
    EXPECT_EQ(schema_field(R"({"solution": {"alternating": "C"}})"), "solution.alternating");
}

TEST(Config, PulseRequiresEveryField)
{
    EXPECT_EQ(schema_field(R"({"pulse": {"amplitude": 1, "window": [0, 1]}})"), "pulse.targets");
    EXPECT_EQ(schema_field(R"({"pulse": {"targets": [1], "window": [0, 1]}})"), "pulse.amplitude");
    EXPECT_EQ(schema_field(R"({"pulse": {"targets": [1], "amplitude": 1}})"), "pulse.window");
    EXPECT_EQ(schema_field(R"({"pulse": {"targets": [1], "amplitude": 1, "window": [2, 1]}})"), "pulse.window");
    EXPECT_EQ(schema_field(R"({"pulse": {"targets": [0.5], "amplitude": 1, "window": [0, 1]}})"), "pulse.targets");
}

TEST(Config, MalformedJsonIsASchemaError)
{
    EXPECT_EQ(schema_field("{\"seed\": "), "<document>");
    EXPECT_EQ(schema_field("[1, 2]"), "<root>");
}

TEST(Config, MakeTopologyForms)
{
    TopologyConfig t;
    t.N = 5;
    EXPECT_EQ(make_topology(t).size(), 5);
    t.form = "global-homogeneous";
    EXPECT_TRUE(make_topology(t).is_circulant());
    t.form = "nearest-neighbour";
    t.w1 = 0.5;
    EXPECT_EQ(make_topology(t).size(), 5);
    TopologyConfig missing;
    try {
        make_topology(missing);
        FAIL() << "missing N accepted";
    } catch (const SchemaError& e) {
        EXPECT_EQ(e.field(), "topology.N");
    }
}

TEST(Config, MorrisLecarNeedsSynapticReversal)
{
    OscillatorConfig o;
    try {
        make_oscillator(o);
        FAIL() << "missing e_syn accepted";
    } catch (const SchemaError& e) {
        EXPECT_EQ(e.field(), "oscillator.e_syn");
    }
    o.e_syn = 0.0;
    EXPECT_EQ(make_oscillator(o).dim, 2);
}

TEST(Config, CouplingStrength)
{
    CouplingConfig c;
    EXPECT_THROW(coupling_strength(c, 4), SchemaError);
    c.g_syn = 0.006;
    EXPECT_DOUBLE_EQ(coupling_strength(c, 7), 0.001);
    c.g_syn.reset();
    c.epsilon = -0.002;
    EXPECT_DOUBLE_EQ(coupling_strength(c, 7), -0.002);
}
