#include "model_io.hpp"

#include <json.hpp>
#include <sstream>
#include <stdexcept>

#include "csv.hpp"

namespace dc {

namespace {

// The document is emitted by hand so every real is written with %.17g;
// nlohmann would otherwise shorten them (still exact, but the format here
// pins 17 significant digits).
void emit_reals(std::ostringstream& out, const Vector& v) {
    out << '[';
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) out << ',';
        out << format_double17(v[i]);
    }
    out << ']';
}

Vector parse_reals(const nlohmann::json& j) {
    Vector v;
    v.reserve(j.size());
    for (const auto& x : j) v.push_back(x.get<double>());
    return v;
}

}  // namespace

void save_model(const std::string& path, const DenseNetwork& net,
                const NormalizationParams& norm) {
    std::ostringstream out;
    const ModelConfig& c = net.config;
    out << "{\n";
    out << "  \"format\": \"deepconsensus-model\",\n";
    out << "  \"format_version\": 1,\n";
    out << "  \"config\": {\n";
    out << "    \"name\": " << nlohmann::json(c.name).dump() << ",\n";
    out << "    \"hidden_width\": " << c.hidden_width << ",\n";
    out << "    \"activation\": \"" << to_string(c.activation) << "\",\n";
    out << "    \"optimizer\": \"" << to_string(c.optimizer) << "\",\n";
    out << "    \"weight_init\": \"" << to_string(c.init.weight_init) << "\",\n";
    out << "    \"bias_init\": \"" << to_string(c.init.bias_init) << "\",\n";
    out << "    \"bias_constant\": " << format_double17(c.init.constant_value) << ",\n";
    out << "    \"layer_count\": " << c.layer_count << ",\n";
    out << "    \"seed\": " << c.seed << ",\n";
    out << "    \"epochs\": " << c.epochs << ",\n";
    out << "    \"batch_size\": " << c.batch_size << ",\n";
    out << "    \"learning_rate\": " << format_double17(c.learning_rate) << "\n";
    out << "  },\n";
    out << "  \"input_dim\": " << net.input_dim << ",\n";
    out << "  \"class_count\": " << net.class_count << ",\n";
    out << "  \"normalization\": {\"min\": ";
    emit_reals(out, norm.min);
    out << ", \"max\": ";
    emit_reals(out, norm.max);
    out << "},\n";
    out << "  \"layers\": [\n";
    for (std::size_t l = 0; l < net.layers.size(); ++l) {
        const Layer& layer = net.layers[l];
        out << "    {\"in_dim\": " << layer.in_dim() << ", \"out_dim\": " << layer.out_dim()
            << ", \"activation\": \"" << to_string(layer.activation) << "\",\n";
        out << "     \"weights\": ";
        emit_reals(out, layer.weights.data);
        out << ",\n     \"biases\": ";
        emit_reals(out, layer.biases);
        out << "}" << (l + 1 < net.layers.size() ? "," : "") << "\n";
    }
    out << "  ]\n";
    out << "}\n";
    write_file_atomic(path, out.str());
}

PersistedModel load_model(const std::string& path) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(read_file(path));
    } catch (const nlohmann::json::parse_error& e) {
        throw std::invalid_argument("load_model: " + path + " is not valid JSON: " + e.what());
    }
    if (j.value("format", "") != "deepconsensus-model") {
        throw std::invalid_argument("load_model: " + path + " is not a model file");
    }

    PersistedModel m;
    const auto& jc = j.at("config");
    ModelConfig& c = m.net.config;
    c.name = jc.at("name").get<std::string>();
    c.hidden_width = jc.at("hidden_width").get<std::size_t>();
    c.activation = activation_from_string(jc.at("activation").get<std::string>());
    c.optimizer = optimizer_from_string(jc.at("optimizer").get<std::string>());
    c.init.weight_init = weight_init_from_string(jc.at("weight_init").get<std::string>());
    c.init.bias_init = bias_init_from_string(jc.at("bias_init").get<std::string>());
    c.init.constant_value = jc.at("bias_constant").get<double>();
    c.layer_count = jc.at("layer_count").get<std::size_t>();
    c.seed = jc.at("seed").get<std::uint64_t>();
    c.epochs = jc.at("epochs").get<std::size_t>();
    c.batch_size = jc.at("batch_size").get<std::size_t>();
    c.learning_rate = jc.at("learning_rate").get<double>();

    m.net.input_dim = j.at("input_dim").get<std::size_t>();
    m.net.class_count = j.at("class_count").get<std::size_t>();
    m.norm.min = parse_reals(j.at("normalization").at("min"));
    m.norm.max = parse_reals(j.at("normalization").at("max"));

    for (const auto& jl : j.at("layers")) {
        Layer layer;
        const auto in_dim = jl.at("in_dim").get<std::size_t>();
        const auto out_dim = jl.at("out_dim").get<std::size_t>();
        layer.activation = activation_from_string(jl.at("activation").get<std::string>());
        layer.weights = Matrix(out_dim, in_dim);
        Vector w = parse_reals(jl.at("weights"));
        if (w.size() != in_dim * out_dim) {
            throw std::invalid_argument("load_model: layer tensor size mismatch in " + path);
        }
        layer.weights.data = std::move(w);
        layer.biases = parse_reals(jl.at("biases"));
        if (layer.biases.size() != out_dim) {
            throw std::invalid_argument("load_model: bias size mismatch in " + path);
        }
        m.net.layers.push_back(std::move(layer));
    }
    if (m.net.layers.empty()) throw std::invalid_argument("load_model: no layers in " + path);
    return m;
}

}  // namespace dc
