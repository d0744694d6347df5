// vcalc — command-line front end: --eval lines, --script files, or a REPL.

#include <unistd.h>

#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "session.hpp"

int main(int argc, char** argv) {
  using namespace vcalc::cli;

  CLI::App app{"vcalc — virtual numbers, functions, integrals and sequences"};
  std::string script;
  std::vector<std::string> lines;
  std::string schedule;
  std::optional<double> tol, quad_tol;
  bool json = false;
  app.add_option("--script", script, "Run the commands in FILE");
  app.add_option("--eval,-e", lines, "Evaluate one command line (repeatable)");
  app.add_flag("--json", json, "Emit one JSON record per line");
  app.add_option("--schedule", schedule, "Sampling schedule N0,RATIO,STEPS");
  app.add_option("--tol", tol, "Limit tolerance")->check(CLI::PositiveNumber);
  app.add_option("--quad-tol", quad_tol, "Quadrature tolerance (abs and rel)")->check(CLI::PositiveNumber);
  CLI11_PARSE(app, argc, argv);

  Options opts;
  opts.json = json;
  try {
    if (!schedule.empty()) opts.settings.schedule = Interpreter::parse_schedule(schedule);
  } catch (const std::exception& e) {
    std::cerr << "vcalc: " << e.what() << '\n';
    return 2;
  }
  if (tol) opts.settings.limit_tol = *tol;
  if (quad_tol) opts.quad.abs_tol = opts.quad.rel_tol = *quad_tol;

  if (!script.empty()) {
    int rc = run_script(script, opts, std::cout, std::cerr);
    if (rc == 2 || lines.empty()) return rc;
  }
  SessionState state(opts);
  if (!lines.empty()) {
    int rc = 0;
    for (const auto& l : lines) {
      if (auto r = repl_eval_line(state, l)) {
        rc |= r->kind == RecordKind::Error;
        emit(state, *r, std::cout, false);
      }
      if (state.quit) break;
    }
    return rc;
  }
  if (!script.empty()) return 0;

  const bool tty = isatty(STDIN_FILENO);
  if (!tty) return run_stream(state, std::cin, std::cout, false);
  std::string line;
  int errors = 0;
  while (!state.quit) {
    std::cout << "vcalc> " << std::flush;
    if (!std::getline(std::cin, line)) break;
    if (auto r = repl_eval_line(state, line)) {
      errors += r->kind == RecordKind::Error;
      emit(state, *r, std::cout, false);
    }
  }
  std::cout << '\n';
  return errors ? 1 : 0;
}
