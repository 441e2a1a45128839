#include "lecam/io.hpp"

#include "lecam/scenarios.hpp"

#include <fmt/format.h>

#include <fstream>
#include <sstream>

namespace lecam {

Json read_json_file(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in)
        throw IoError(fmt::format("cannot open '{}'", path.string()));
    try {
        return Json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw IoError(fmt::format("'{}': {}", path.string(), e.what()));
    }
}

void write_text_file(const std::filesystem::path& path, const std::string& text)
{
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw IoError(fmt::format("cannot write '{}'", path.string()));
    out << text;
    if (!out)
        throw IoError(fmt::format("error writing '{}'", path.string()));
}

void write_json_file(const std::filesystem::path& path, const Json& value)
{
    write_text_file(path, value.dump(2) + "\n");
}

std::vector<ParamLabel> read_labels(const Json& value)
{
    if (!value.is_array())
        throw InvalidArgument("expected an array of parameter labels");
    std::vector<ParamLabel> out;
    for (const auto& v : value) {
        if (v.is_number())
            out.push_back(format_label(v.get<double>()));
        else if (v.is_string())
            out.push_back(v.get<std::string>());
        else
            throw InvalidArgument(fmt::format("parameter label {} is neither a number nor a string", v.dump()));
    }
    return out;
}

namespace {

const Json& field(const Json& obj, const char* key)
{
    if (!obj.is_object() || !obj.contains(key))
        throw InvalidArgument(fmt::format("missing field \"{}\"", key));
    return obj.at(key);
}

Matrix read_matrix(const Json& value, const char* what)
{
    if (!value.is_array())
        throw InvalidArgument(fmt::format("\"{}\" must be an array of rows", what));
    Matrix out;
    for (const auto& row : value) {
        if (!row.is_array())
            throw InvalidArgument(fmt::format("\"{}\" must be an array of rows", what));
        Vector r;
        for (const auto& v : row) {
            if (!v.is_number())
                throw InvalidArgument(fmt::format("\"{}\" holds a non-numeric entry {}", what, v.dump()));
            r.push_back(v.get<double>());
        }
        out.push_back(std::move(r));
    }
    return out;
}

Json matrix_json(const Matrix& m)
{
    Json out = Json::array();
    for (const auto& row : m)
        out.push_back(row);
    return out;
}

Json optional_int(const std::optional<int>& v)
{
    return v ? Json(*v) : Json(nullptr);
}

} // namespace

FiniteExperiment read_experiment(const Json& value)
{
    auto params = read_labels(field(value, "params"));
    auto probs = read_matrix(field(value, "probs"), "probs");
    if (value.contains("atoms")) {
        const auto& atoms = value.at("atoms");
        if (!atoms.is_array())
            throw InvalidArgument("\"atoms\" must be an array");
        for (const auto& row : probs)
            if (row.size() != atoms.size())
                throw DimensionError(
                    fmt::format("a probability row has {} entries for {} atoms", row.size(), atoms.size()));
    }
    return FiniteExperiment::normalized(std::move(params), std::move(probs), 1e-9);
}

Json to_json(const FiniteExperiment& experiment)
{
    Json atoms = Json::array();
    for (std::size_t i = 0; i < experiment.sample_size(); ++i)
        atoms.push_back(i);
    return Json{{"params", experiment.params()}, {"atoms", atoms}, {"probs", matrix_json(experiment.probs())}};
}

LossSpec read_loss(const Json& value, const std::vector<ParamLabel>& default_params)
{
    std::vector<std::string> actions;
    const auto& a = field(value, "actions");
    if (!a.is_array())
        throw InvalidArgument("\"actions\" must be an array");
    for (const auto& v : a)
        actions.push_back(v.is_string() ? v.get<std::string>() : v.dump());
    auto params = value.contains("params") ? read_labels(value.at("params")) : default_params;
    const auto& m = field(value, "M");
    if (!m.is_number())
        throw InvalidArgument("\"M\" must be a number");
    return LossSpec(std::move(params), std::move(actions), read_matrix(field(value, "L"), "L"), m.get<double>());
}

Json to_json(const LossSpec& loss)
{
    return Json{{"params", loss.params()},
                {"actions", loss.actions()},
                {"L", matrix_json(loss.loss())},
                {"M", loss.truncation()}};
}

Json to_json(const Kernel& kernel)
{
    return Json{{"from_size", kernel.from_size()}, {"to_size", kernel.to_size()}, {"matrix", matrix_json(kernel.matrix())}};
}

Json to_json(const DualCertificate& c)
{
    return Json{{"primal_objective", c.primal_objective},
                {"dual_objective", c.dual_objective},
                {"gap", c.gap},
                {"dual_infeasibility", c.dual_infeasibility},
                {"primal_infeasibility", c.primal_infeasibility},
                {"iterations", c.iterations},
                {"row_duals", c.row_duals}};
}

Json to_json(const DeficiencyResult& result)
{
    Json out{{"value", result.value}, {"subset", result.subset}, {"kernel", to_json(result.kernel)}};
    out["dual_certificate"] = result.dual_certificate ? to_json(*result.dual_certificate) : Json(nullptr);
    return out;
}

Json to_json(const LeCamDistance& d)
{
    return Json{{"value", d.value},
                {"mode", to_string(d.mode)},
                {"forward", to_json(d.forward)},
                {"backward", to_json(d.backward)}};
}

Json to_json(const CouplingCertificate& c, const Partition& partition)
{
    Json cells = Json::array();
    for (std::size_t a = 0; a < c.cells.size(); ++a)
        cells.push_back(Json{{"cell", a},
                             {"p_mass", c.cells[a].p_mass},
                             {"q_mass", c.cells[a].q_mass},
                             {"condition_holds", c.cells[a].holds}});
    Json balls = Json::array();
    for (const auto& b : partition.balls())
        balls.push_back(Json{{"centre", b.centre}, {"radius", b.radius}});
    return Json{{"delta", c.delta},
                {"epsilon", c.epsilon},
                {"bound", c.bound},
                {"achieved", c.achieved},
                {"deviations", c.deviations},
                {"transport_costs", c.transport_costs},
                {"q_remainders", c.q_remainders},
                {"partition", Json{{"dim", partition.dim()}, {"balls", balls}}},
                {"cells", cells},
                {"mu", c.mu},
                {"kernel", to_json(c.kernel)}};
}

Json to_json(const ConvergenceReport& report)
{
    Json stages = Json::array();
    for (const auto& s : report.stages) {
        Json failures = Json::array();
        for (const auto& [n, cell] : s.failures)
            failures.push_back(Json{{"n", n}, {"cell", cell}});
        stages.push_back(Json{{"j", s.index},
                              {"delta", s.stage.delta},
                              {"epsilon", s.stage.epsilon},
                              {"bound", 2.0 * s.stage.delta + 4.0 * s.stage.epsilon},
                              {"cells", s.cells},
                              {"n_j", optional_int(s.threshold)},
                              {"failures", failures}});
    }
    Json rows = Json::array();
    for (const auto& r : report.rows) {
        Json row{{"n", r.n}};
        row["stage"] = r.stage ? Json(*r.stage) : Json(nullptr);
        row["certified_bound"] = r.stage ? Json(r.certified_bound) : Json(nullptr);
        row["achieved"] = r.stage ? Json(r.achieved) : Json(nullptr);
        row["lp_deficiency"] = r.lp_deficiency;
        row["lp_gap"] = r.lp_gap;
        row["transport"] = r.transport;
        rows.push_back(std::move(row));
    }
    return Json{{"stages", stages},
                {"rows", rows},
                {"truncated", report.truncated},
                {"diagnostic", report.diagnostic},
                {"consistent", report.consistent()}};
}

Json to_json(const GameResult& game, const LossSpec& loss)
{
    return Json{{"value", game.value},
                {"subset", game.subset},
                {"prior", game.prior},
                {"risks", game.risks},
                {"gap", game.gap},
                {"lp_gap", game.certificate.gap},
                {"M", loss.truncation()},
                {"actions", loss.actions()},
                {"decision", to_json(game.decision)}};
}

Json to_json(const TransferReport& report)
{
    Json rows = Json::array();
    for (const auto& r : report.rows)
        rows.push_back(Json{{"n", r.n},
                            {"exact", r.exact},
                            {"epsilon", r.epsilon},
                            {"transfer_bound", r.transfer_bound},
                            {"composed_limit_risk", r.composed_limit_risk},
                            {"bound_holds", r.bound_holds},
                            {"exceeds_rprime", r.exceeds_rprime}});
    return Json{{"limit_value", report.limit_value},
                {"limit_prior", report.limit_prior},
                {"rprime", report.rprime},
                {"M", report.truncation},
                {"rows", rows},
                {"crossing", optional_int(report.crossing)},
                {"all_bounds_hold", report.all_bounds_hold()}};
}

std::vector<ParamLabel> split_labels(const std::string& text)
{
    std::vector<ParamLabel> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        const auto b = item.find_first_not_of(" \t");
        const auto e = item.find_last_not_of(" \t");
        if (b == std::string::npos)
            throw InvalidArgument(fmt::format("empty entry in list '{}'", text));
        item = item.substr(b, e - b + 1);
        // Normalize numeric spellings ("1.0" -> "1") so they match generated labels.
        try {
            std::size_t used = 0;
            const double v = std::stod(item, &used);
            if (used == item.size())
                item = format_label(v);
        } catch (const std::exception&) {
        }
        out.push_back(item);
    }
    if (out.empty())
        throw InvalidArgument("empty list");
    return out;
}

std::vector<int> split_ints(const std::string& text)
{
    std::vector<int> out;
    for (const auto& item : split_labels(text)) {
        std::size_t used = 0;
        int v = 0;
        try {
            v = std::stoi(item, &used);
        } catch (const std::exception&) {
            used = 0;
        }
        if (used != item.size() || used == 0)
            throw InvalidArgument(fmt::format("'{}' is not an integer", item));
        out.push_back(v);
    }
    return out;
}

std::string to_csv(const std::vector<std::string>& header, const std::vector<std::vector<std::string>>& rows)
{
    std::string out;
    auto line = [&out](const std::vector<std::string>& cells) {
        for (std::size_t i = 0; i < cells.size(); ++i) {
            if (i)
                out += ',';
            out += cells[i];
        }
        out += '\n';
    };
    line(header);
    for (const auto& r : rows)
        line(r);
    return out;
}

} // namespace lecam
