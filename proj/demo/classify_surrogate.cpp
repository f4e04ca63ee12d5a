// Nearest-mean classification of synthetic warped spike trains.

#include <cstdio>

#include "phasewarp/phasewarp.hpp"

using namespace phasewarp;

int main() {
  SurrogateOptions so;
  so.seed = 3;
  const auto [train, test] = make_classification_surrogate(so);
  for (MeanMethod m : {MeanMethod::proposed, MeanMethod::cross_sectional}) {
    ClassifierOptions co;
    co.estimator.mean_method = m;
    const ClassificationReport rep = run_classification(train, test, co);
    std::printf("%s: accuracy %.3f\n", to_string(m).c_str(), rep.accuracy);
    for (std::size_t i = 0; i < rep.classes.size(); ++i) {
      std::printf("  %-8s", rep.classes[i].c_str());
      for (std::size_t c : rep.confusion[i]) std::printf(" %3zu", c);
      std::printf("\n");
    }
  }
}
