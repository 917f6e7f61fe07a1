#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "jbt/weyl.hpp"

namespace jbt::cli {

enum ExitCode : int {
  kOk = 0,
  kUsage = 1,
  kDegenerate = 2,
  kCheckFailed = 3,
  kUnmatchedPole = 4,
  kSkippedPoints = 5,
};

struct LambdaGrid {
  cplx start, stop;
  int count = 1;
};

struct RunConfig {
  double alpha = 0.3;
  double beta = 0.7;
  int n = 2;
  std::string extension = "friedrichs";  // friedrichs | gamma1 | separated | periodic
  std::vector<double> theta;
  std::optional<LambdaGrid> lambda_grid;
  std::vector<cplx> lambdas;  // explicit points, appended after the grid
  std::optional<std::pair<double, double>> window;
  std::string output_format = "json";
  std::optional<double> tolerance;
  std::string input;  // verify: re-check a saved mfunction file instead of running the suites

  Parameters parameters() const { return Parameters(alpha, beta, n); }
};

// "1", "-2.5", "3i", "-i", "1+2i", "1e-3-4e-2i"
cplx parse_complex(const std::string& text);
LambdaGrid parse_grid(const std::string& text);  // start:stop:count
std::pair<double, double> parse_window(const std::string& text);  // lo:hi
std::vector<double> parse_list(const std::string& text);  // c1,c2,...

// Keys mirror RunConfig; values present in the file replace the current ones.
void apply_toml(const std::string& path, RunConfig& cfg);

// Throws InvalidParameters on anything a command cannot run with.
void validate(const RunConfig& cfg);
ExtensionSpec extension_of(const RunConfig& cfg);
std::vector<cplx> grid_points(const RunConfig& cfg);

struct Record {
  cplx lambda;
  CMatrix m;
};

std::vector<Record> read_records(std::istream& in);

// Herglotz verdicts from saved records: positivity on the upper half-plane records,
// symmetry wherever the conjugate point is also present.
struct RecordVerdict {
  cplx lambda;
  std::optional<double> min_imag_eigenvalue;
  std::optional<double> symmetry_error;
  bool pass = true;
};
std::vector<RecordVerdict> herglotz_from_records(const std::vector<Record>& recs, double positivity_tol,
                                                 double symmetry_tol);

struct SuiteResult {
  std::string name;
  bool pass = false;
  double worst = 0.0;
  double tolerance = 0.0;
  std::string detail;
};

std::vector<SuiteResult> verify_suites(const RunConfig& cfg);

int cmd_gram_schmidt(const RunConfig& cfg, std::ostream& out, std::ostream& err);
int cmd_spectrum(const RunConfig& cfg, std::ostream& out, std::ostream& err);
int cmd_mfunction(const RunConfig& cfg, std::ostream& out, std::ostream& err);
int cmd_verify(const RunConfig& cfg, std::ostream& out, std::ostream& err);

int run(int argc, char** argv, std::ostream& out, std::ostream& err);

}  // namespace jbt::cli
