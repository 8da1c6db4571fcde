#include "gsvgd/model.hpp"

namespace gsvgd::model {

// Observations y_1..y_20 drawn once with Rng(0) and sigma_obs = 0.1
// (tools/gen_diffusion_observations). Also in data/diffusion_observations.csv.
const Vector& reference_diffusion_observations() {
  static const Vector y = [] {
    Vector v(ConditionedDiffusionModel::kObservations);
    v << 0.50992719829742916,
        0.39341137906813883,
        0.82663834837343353,
        1.065566089371633,
        0.45470282570336573,
        0.91178137630100886,
        0.70669091842841392,
        1.1780507418562205,
        0.87612012325024691,
        1.4484966891227709,
        0.9808085754127952,
        1.3165793261579457,
        0.9785951084451292,
        0.76196009405834431,
        0.37350886866745858,
        0.64740424105396477,
        1.1404178532025162,
        1.1405698295415827,
        0.99513021725862594,
        1.1939773048553535;
    return v;
  }();
  return y;
}

}  // namespace gsvgd::model
