#pragma once

#include "seqfeat/features.hpp"
#include "seqfeat/series.hpp"

#include <functional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace seqfeat {

/// Output of a processing function. An empty name is only allowed for the
/// single output of a single-name selector entry and inherits that name.
struct SeriesData {
    std::string name;
    IndexColumn index;
    ValueColumn values;
};

/// Whole-series processing callable: receives one read-only view per name of
/// the selector entry and returns any number of named outputs.
using ProcessFunction = std::function<std::vector<SeriesData>(std::span<const SeriesView> inputs, const Params&)>;

/// Output names a step produces for one selector entry, known without running
/// it. An empty declaration marks the step as dynamic.
using OutputDeclaration = std::function<std::vector<std::string>(std::span<const std::string> entry)>;

/// One selector entry: a single name (the function runs on it alone) or a
/// tuple of names passed jointly.
using SelectorEntry = std::vector<std::string>;

struct ProcessorStep {
    std::string label;
    ProcessFunction function;
    std::vector<SelectorEntry> selector;
    Params params;
    OutputDeclaration declared_outputs;

    /// Throws InvalidDescriptor for an empty selector or entry.
    void validate() const;
};

/// Ordered list of processing steps applied one after the other.
class Pipeline {
public:
    Pipeline() = default;

    Pipeline& add_step(ProcessorStep step);
    const std::vector<ProcessorStep>& steps() const noexcept { return steps_; }
    std::size_t size() const noexcept { return steps_.size(); }
    bool empty() const noexcept { return steps_.empty(); }

private:
    std::vector<ProcessorStep> steps_;
};

/// Runs the steps in order over a copy of `input` (unreplaced series share
/// storage; `input` is never modified). Selector entries of one step may run
/// on `n_workers` threads and must produce disjoint output names.
/// Throws UnknownSeries, StepFailure, ReservedCharacterInName or
/// OverlappingOutputs, each naming the step ordinal.
SeriesSet run_pipeline(const Pipeline& pipeline, const SeriesSet& input, int n_workers = 1);

/// Names selected by some step and not declared as output by an earlier
/// step. Throws DynamicStepUnresolvable when a step declares no outputs.
std::set<std::string> required_inputs(const Pipeline& pipeline);

/// Built-in processors (values are read as f64, outputs are f64):
///   clip            params {"lower", "upper"} (either optional)
///   scale           x * factor + offset, params {"factor"=1, "offset"=0}
///   median_filter   centered running median, params {"size"} odd >= 1,
///                   the window shrinks at the edges
///   resample_linear regular grid from the first sample with params
///                   {"period": delta string}, linear interpolation
///   smv             joint entry of k aligned series -> sqrt(sum x_i^2);
///                   params {"name"} (default: common prefix + "SMV")
ProcessorStep builtin_processor(std::string_view name, std::vector<SelectorEntry> selector, Params params = {});

const std::vector<std::string>& builtin_processor_names();

/// Default output name of `smv` for a tuple of input names.
std::string smv_output_name(std::span<const std::string> names);

} // namespace seqfeat
