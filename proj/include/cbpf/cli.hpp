#pragma once

namespace cbpf {

// stats | evaluate | synth, each taking --config plus optional --output and
// --seed overrides. Exit codes: 0 success, 1 config or validation problem,
// 2 runtime failure.
int run_cli(int argc, char** argv);

} // namespace cbpf
