#include "emo/face/cascade.hpp"

#include <boost/property_tree/ptree.hpp>
#include <boost/property_tree/xml_parser.hpp>

#include <sstream>

#include "emo/core/error.hpp"
#include "emo/core/io.hpp"

namespace emo::face {
namespace pt = boost::property_tree;

namespace {

template <typename T>
std::vector<T> numbers(const std::string& s) {
  std::istringstream in(s);
  std::vector<T> out;
  T v;
  while (in >> v) out.push_back(v);
  return out;
}

[[noreturn]] void bad(const std::string& msg) { throw Error(Errc::BadCascade, msg); }

}  // namespace

CascadeModel parse_cascade(const std::string& xml) {
  pt::ptree tree;
  try {
    std::istringstream in(xml);
    pt::read_xml(in, tree, pt::xml_parser::trim_whitespace);
  } catch (const pt::xml_parser_error& e) {
    bad(std::string("cascade XML: ") + e.what());
  }
  const auto root = tree.get_child_optional("opencv_storage.cascade");
  if (!root) bad("missing <opencv_storage><cascade>");
  const auto& c = *root;
  if (c.get<std::string>("stageType", "") != "BOOST") bad("stageType must be BOOST");
  if (c.get<std::string>("featureType", "") != "HAAR") bad("featureType must be HAAR");

  CascadeModel model;
  model.window_w = c.get<int>("width", 0);
  model.window_h = c.get<int>("height", 0);
  if (model.window_w <= 2 || model.window_h <= 2) bad("window size missing");

  struct Feature {
    std::vector<HaarRect> rects;
  };
  std::vector<Feature> features;
  const auto feats = c.get_child_optional("features");
  if (!feats) bad("missing <features>");
  for (const auto& [tag, node] : *feats) {
    if (tag != "_") continue;
    if (node.get<int>("tilted", 0) != 0) bad("tilted features are not supported");
    Feature f;
    const auto rects = node.get_child_optional("rects");
    if (!rects) bad("feature without <rects>");
    for (const auto& [rtag, rnode] : *rects) {
      if (rtag != "_") continue;
      const auto v = numbers<double>(rnode.get_value<std::string>());
      if (v.size() != 5) bad("rect needs 5 numbers");
      HaarRect r{static_cast<int>(v[0]), static_cast<int>(v[1]), static_cast<int>(v[2]),
                 static_cast<int>(v[3]), v[4]};
      if (r.x < 0 || r.y < 0 || r.w <= 0 || r.h <= 0 || r.x + r.w > model.window_w ||
          r.y + r.h > model.window_h) {
        bad("rect outside the detection window");
      }
      f.rects.push_back(r);
    }
    if (f.rects.size() < 2 || f.rects.size() > 3) bad("feature needs 2 or 3 rects");
    features.push_back(std::move(f));
  }

  const auto stages = c.get_child_optional("stages");
  if (!stages) bad("missing <stages>");
  for (const auto& [tag, snode] : *stages) {
    if (tag != "_") continue;
    Stage st;
    st.threshold = snode.get<double>("stageThreshold");
    const auto weak = snode.get_child_optional("weakClassifiers");
    if (!weak) bad("stage without <weakClassifiers>");
    for (const auto& [wtag, wnode] : *weak) {
      if (wtag != "_") continue;
      const auto nodes = numbers<double>(wnode.get<std::string>("internalNodes"));
      const auto leaves = numbers<double>(wnode.get<std::string>("leafValues"));
      if (nodes.size() != 4 || leaves.size() != 2) bad("only stump classifiers are supported");
      const auto fi = static_cast<std::size_t>(nodes[2]);
      if (nodes[2] < 0 || fi >= features.size()) bad("feature index out of range");
      WeakClassifier w;
      w.rects = features[fi].rects;
      w.threshold = nodes[3];
      w.left = leaves[0];
      w.right = leaves[1];
      st.weak.push_back(std::move(w));
    }
    if (st.weak.empty()) bad("empty stage");
    model.stages.push_back(std::move(st));
  }
  if (model.stages.empty()) bad("cascade has no stages");
  return model;
}

CascadeModel load_cascade(const std::filesystem::path& path) {
  const auto bytes = read_file(path);
  CascadeModel m = parse_cascade(std::string(bytes.begin(), bytes.end()));
  m.sha256 = sha256_hex(bytes);
  return m;
}

}  // namespace emo::face
