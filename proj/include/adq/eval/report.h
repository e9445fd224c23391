#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "adq/eval/cross_validate.h"
#include "adq/models/logistic.h"

namespace adq::eval {

/// method,k,seed,fold,auc,n_test,n_pos,n_neg,lambda. Wall-times are kept out so the file is
/// reproducible; see write_runtime_csv.
void write_fold_csv(std::ostream& out, const std::vector<EvalReport>& reports);
/// Inverse of write_fold_csv; reports keep their first-appearance order and are summarized.
std::vector<EvalReport> read_fold_csv(std::istream& in);

/// method,fold,train_seconds,predict_seconds.
void write_runtime_csv(std::ostream& out, const std::vector<EvalReport>& reports);

/// Mean AUC with its 95% interval per method.
std::string summary_table(const std::vector<EvalReport>& reports);
/// Mean training and prediction seconds per fold, per method.
std::string runtime_table(const std::vector<EvalReport>& reports);

/// feature_name,coefficient for every nonzero weight, by descending magnitude.
void write_coefficients_csv(std::ostream& out, const models::LinearModel& model);

}  // namespace adq::eval
