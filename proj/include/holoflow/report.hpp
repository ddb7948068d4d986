#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"

#include "holoflow/decomposition.hpp"
#include "holoflow/holonomy.hpp"
#include "holoflow/surface.hpp"

namespace holoflow::report {

using Json = nlohmann::json;  // std::map objects: keys come out sorted

inline constexpr const char* kToolVersion = "0.3.0";
inline constexpr const char* kReportSchema = "holoflow.report/1";
inline constexpr const char* kGluingSchema = "holoflow.gluing/1";

// Numbers are rounded to 12 significant digits so reports are byte-stable;
// non-finite values become the strings "inf", "-inf" and "nan".
Json number(double v);
Json point(Complex z);
Json point(Vec2 p);

// Two-space indent and a trailing newline.
std::string dump(const Json& j);

Json to_json(const Singularity& s);
Json to_json(const Trajectory& t, std::size_t max_samples = 64);
Json to_json(const Skeleton& sk);
Json to_json(const Decomposition& d);
Json to_json(const HolonomyReport& r);
Json to_json(const FirstReturnReport& r);
Json to_json(const AdmissibilityReport& r);
Json to_json(const GluingReport& r);
Json to_json(const FlatSurface& s, const GapReport& gaps);
Json to_json(const WordCheck& w);
Json to_json(const GermSummary& g);

// Envelope shared by every subcommand.
Json envelope(const std::string& command);

// ---- Gluing specs.

struct SchemaIssue {
    std::string pointer;  // JSON pointer into the document
    std::string message;
};

class SpecError : public std::runtime_error {
public:
    explicit SpecError(std::vector<SchemaIssue> issues);
    const std::vector<SchemaIssue>& issues() const { return issues_; }

private:
    std::vector<SchemaIssue> issues_;
};

// Reads a "holoflow.gluing/1" document; collects every structural problem
// before throwing. An optional "periodic" block unrolls the cell.
GluingSpec parse_gluing(const Json& doc);
Json gluing_to_json(const GluingSpec& spec);

}  // namespace holoflow::report
