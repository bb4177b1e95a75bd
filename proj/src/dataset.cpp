#include "pift/dataset.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

namespace pift {

void Dataset::validate(const Domain& domain) const {
  if (!(sigma > 0.0)) throw std::invalid_argument("dataset: sigma must be positive");
  if (static_cast<Eigen::Index>(locations.size()) != values.size()) {
    throw std::invalid_argument("dataset: locations and values differ in length");
  }
  for (std::size_t j = 0; j < locations.size(); ++j) {
    if (!domain.contains(locations[j])) {
      throw std::invalid_argument("dataset: location " + std::to_string(j) +
                                  " lies outside " + domain.describe());
    }
  }
}

void Dataset::write_csv(const std::string& path, int dim) const {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out.precision(17);
  out << (dim == 2 ? "x,y,value\n" : "x,value\n");
  for (Eigen::Index j = 0; j < size(); ++j) {
    const Point& p = locations[static_cast<std::size_t>(j)];
    out << p.x << ',';
    if (dim == 2) out << p.y << ',';
    out << values[j] << '\n';
  }
}

Dataset Dataset::read_csv(const std::string& path, double sigma) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read " + path);
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error(path + ": missing header");
  const bool two_d = line.rfind("x,y,", 0) == 0;
  Dataset data;
  data.sigma = sigma;
  std::vector<double> values;
  int row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string cell;
    std::vector<double> cells;
    while (std::getline(ss, cell, ',')) {
      try {
        cells.push_back(std::stod(cell));
      } catch (const std::exception&) {
        throw std::runtime_error(path + ":" + std::to_string(row) + ": bad number '" +
                                 cell + "'");
      }
    }
    const std::size_t expected = two_d ? 3 : 2;
    if (cells.size() != expected) {
      throw std::runtime_error(path + ":" + std::to_string(row) + ": expected " +
                               std::to_string(expected) + " columns");
    }
    data.locations.push_back({cells[0], two_d ? cells[1] : 0.0});
    values.push_back(cells.back());
  }
  data.values = Eigen::Map<Eigen::VectorXd>(values.data(),
                                            static_cast<Eigen::Index>(values.size()));
  return data;
}

}  // namespace pift
