#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "misinfo/annotations.hpp"
#include "misinfo/corpus.hpp"
#include "misinfo/dataset.hpp"
#include "misinfo/embeddings.hpp"
#include "misinfo/engine.hpp"
#include "misinfo/entity_swap.hpp"
#include "misinfo/error.hpp"
#include "misinfo/eval.hpp"
#include "misinfo/external.hpp"
#include "misinfo/mock.hpp"
#include "misinfo/similarity.hpp"

namespace py = pybind11;
using namespace misinfo;

namespace {

StrategyKind strategy_kind(const std::string& name) {
  const auto kind = parse_strategy_kind(name);
  if (!kind) throw Error(ErrorCode::InvalidArgument, "unknown strategy '" + name + "'");
  return *kind;
}

/// Index plus the topic partition it points into.
struct PySimilarityIndex {
  std::shared_ptr<const Corpus> corpus;
  std::shared_ptr<const EmbeddingStore> image, text;
  std::unique_ptr<TopicIndex> topics;
  std::unique_ptr<SimilarityIndex> index;
};

CandidateFilter make_filter(const std::vector<RecordId>& exclude, bool exclude_identical) {
  CandidateFilter f;
  f.exclude_ids.insert(exclude.begin(), exclude.end());
  f.exclude_identical_captions = exclude_identical;
  return f;
}

py::dict manifest_dict(const Manifest& m) {
  py::dict counts;
  counts["truthful"] = m.counts.truthful;
  counts["ooc"] = m.counts.ooc;
  counts["nei"] = m.counts.nei;
  py::dict d;
  d["dataset"] = m.dataset;
  d["split"] = std::string(to_string(m.split));
  d["strategy"] = m.run.strategy;
  d["seed"] = m.run.seed;
  d["records"] = m.records;
  d["counts"] = counts;
  d["checksum"] = m.checksum;
  return d;
}

py::dict counts_dict(const ClassCounts& c) {
  py::dict d;
  d["truthful"] = c.truthful;
  d["ooc"] = c.ooc;
  d["nei"] = c.nei;
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Synthetic misinformation dataset generation and evaluation";

  // Owned by the module for the life of the interpreter.
  static PyObject* error_type = PyErr_NewException("misinfo_forge._core.MisinfoError", PyExc_RuntimeError, nullptr);
  m.add_object("MisinfoError", py::handle(error_type));
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      py::object exc = py::handle(error_type)(e.what());
      exc.attr("code") = std::string(to_string(e.code()));
      PyErr_SetObject(error_type, exc.ptr());
    }
  });

  // --- corpus store ---------------------------------------------------------
  py::class_<NewsRecord>(m, "NewsRecord")
      .def_readonly("id", &NewsRecord::id)
      .def_readonly("image_ref", &NewsRecord::image_ref)
      .def_readonly("caption", &NewsRecord::caption)
      .def_readonly("topic", &NewsRecord::topic)
      .def_readonly("source", &NewsRecord::source)
      .def_property_readonly("split", [](const NewsRecord& r) { return std::string(to_string(r.split)); })
      .def("__repr__", [](const NewsRecord& r) {
        return "<NewsRecord " + std::to_string(r.id) + " " + r.topic + ">";
      });

  py::class_<Corpus, std::shared_ptr<Corpus>>(m, "Corpus")
      .def("__len__", &Corpus::size)
      .def("__getitem__",
           [](const Corpus& c, std::size_t i) {
             if (i >= c.size()) throw py::index_error();
             return c[i];
           })
      .def("__contains__", &Corpus::contains)
      .def("at", &Corpus::at, py::return_value_policy::copy)
      .def("filter_split", [](const Corpus& c, const std::string& split) {
        return std::make_shared<Corpus>(c.filter_split(parse_split(split)));
      })
      .def_property_readonly("topics", [](const Corpus& c) { return TopicIndex(c).topics(); });

  m.def("load_corpus", [](const std::filesystem::path& p) { return std::make_shared<Corpus>(load_corpus(p)); });
  m.def("save_corpus", &save_corpus);

  py::class_<EntitySpan>(m, "EntitySpan")
      .def_property_readonly("type", [](const EntitySpan& s) { return std::string(to_string(s.type)); })
      .def_readonly("start", &EntitySpan::start)
      .def_readonly("end", &EntitySpan::end)
      .def_readonly("surface", &EntitySpan::surface);

  py::class_<Annotations, std::shared_ptr<Annotations>>(m, "Annotations")
      .def("entities", &Annotations::entities, py::return_value_policy::copy)
      .def("has_entities", &Annotations::has_entities);
  m.def("load_annotations", [](const std::filesystem::path& p, const Corpus& c) {
    return std::make_shared<Annotations>(load_annotations(p, c));
  });
  m.def("save_annotations", &save_annotations);

  m.def(
      "make_mock_corpus",
      [](std::size_t records, std::size_t topics, std::uint64_t seed, double duplicate_rate,
         double val_fraction) {
        MockCorpus mock = make_mock_corpus({records, topics, seed, duplicate_rate, val_fraction});
        return py::make_tuple(std::make_shared<Corpus>(std::move(mock.corpus)),
                              std::make_shared<Annotations>(std::move(mock.annotations)));
      },
      py::arg("records") = 1000, py::arg("topics") = 10, py::arg("seed") = 0,
      py::arg("duplicate_rate") = 0.01, py::arg("val_fraction") = 0.0,
      "Synthetic corpus and its entity annotations.");

  py::class_<EmbeddingStore, std::shared_ptr<EmbeddingStore>>(m, "EmbeddingStore")
      .def_property_readonly("modality", [](const EmbeddingStore& s) { return std::string(to_string(s.modality())); })
      .def_property_readonly("dim", &EmbeddingStore::dim)
      .def("__len__", &EmbeddingStore::size)
      .def_property_readonly("ids", [](const EmbeddingStore& s) {
        return std::vector<RecordId>(s.ids().begin(), s.ids().end());
      })
      .def("vector", [](const EmbeddingStore& s, RecordId id) {
        const auto v = s.vector(id);
        return std::vector<float>(v.begin(), v.end());
      });

  m.def(
      "load_embeddings",
      [](const std::filesystem::path& p, std::optional<std::size_t> expected_dim) {
        return std::make_shared<EmbeddingStore>(load_embeddings(p, expected_dim));
      },
      py::arg("path"), py::arg("expected_dim") = py::none());
  m.def("save_embeddings", &save_embeddings);
  m.def(
      "mock_embed",
      [](const Corpus& c, std::size_t dim, const std::string& modality, std::uint64_t seed, unsigned workers) {
        py::gil_scoped_release release;
        return std::make_shared<EmbeddingStore>(mock_embed(c, dim, parse_modality(modality), seed, workers));
      },
      py::arg("corpus"), py::arg("dim"), py::arg("modality"), py::arg("seed") = 0, py::arg("workers") = 1);

  // --- similarity index -----------------------------------------------------
  m.def("cosine", [](const std::vector<float>& u, const std::vector<float>& v) { return cosine(u, v); });

  py::class_<PySimilarityIndex>(m, "SimilarityIndex")
      .def(py::init([](std::shared_ptr<const Corpus> corpus, std::shared_ptr<const EmbeddingStore> image,
                       std::shared_ptr<const EmbeddingStore> text) {
             auto idx = std::make_unique<PySimilarityIndex>();
             idx->corpus = std::move(corpus);
             idx->image = std::move(image);
             idx->text = std::move(text);
             idx->topics = std::make_unique<TopicIndex>(*idx->corpus);
             idx->index = std::make_unique<SimilarityIndex>(*idx->corpus, *idx->topics, idx->image.get(),
                                                            idx->text.get());
             return idx;
           }),
           py::arg("corpus"), py::arg("image") = nullptr, py::arg("text") = nullptr)
      .def(
          "nearest_candidate",
          [](const PySimilarityIndex& s, RecordId query, const std::string& qs, const std::string& cs,
             std::size_t rank, const std::vector<RecordId>& exclude, bool exclude_identical) {
            return s.index->nearest_candidate(query, parse_modality(qs), parse_modality(cs),
                                              make_filter(exclude, exclude_identical), rank);
          },
          py::arg("query"), py::arg("query_space"), py::arg("candidate_space"), py::arg("rank") = 0,
          py::arg("exclude") = std::vector<RecordId>{}, py::arg("exclude_identical_captions") = false)
      .def(
          "top_k",
          [](const PySimilarityIndex& s, RecordId query, const std::string& qs, const std::string& cs,
             std::size_t k, const std::vector<RecordId>& exclude, bool exclude_identical) {
            return s.index->top_k(query, parse_modality(qs), parse_modality(cs),
                                  make_filter(exclude, exclude_identical), k);
          },
          py::arg("query"), py::arg("query_space"), py::arg("candidate_space"), py::arg("k"),
          py::arg("exclude") = std::vector<RecordId>{}, py::arg("exclude_identical_captions") = false);

  // --- entity swap ----------------------------------------------------------
  m.def(
      "pairwise_swap",
      [](const Corpus& c, const Annotations& a, RecordId source, RecordId donor) {
        return pairwise_swap(c.at(source), a.entities(source), c.at(donor), a.entities(donor))
            .falsified_caption;
      },
      "Falsified caption of `source` after swapping entities with `donor`.");

  // --- engine ---------------------------------------------------------------
  py::class_<GeneratedPair>(m, "GeneratedPair")
      .def_readonly("image_id", &GeneratedPair::image_id)
      .def_readonly("image_ref", &GeneratedPair::image_ref)
      .def_readonly("caption", &GeneratedPair::caption)
      .def_property_readonly("label", [](const GeneratedPair& p) { return std::string(to_string(p.label)); })
      .def_property_readonly("strategy", [](const GeneratedPair& p) { return p.provenance.strategy; })
      .def_property_readonly("source_id", [](const GeneratedPair& p) { return p.provenance.source_id; })
      .def_property_readonly("donor_id", [](const GeneratedPair& p) { return p.provenance.donor_id; })
      .def_property_readonly("seed", [](const GeneratedPair& p) { return p.provenance.seed; })
      .def("__eq__", [](const GeneratedPair& a, const GeneratedPair& b) { return a == b; })
      .def("__repr__", [](const GeneratedPair& p) {
        return "<GeneratedPair " + std::string(to_string(p.label)) + " image=" + std::to_string(p.image_id) + ">";
      });

  m.def(
      "generate",
      [](std::shared_ptr<const Corpus> corpus, const std::string& strategy, std::uint64_t seed,
         std::shared_ptr<const EmbeddingStore> image, std::shared_ptr<const EmbeddingStore> text,
         std::shared_ptr<const Annotations> annotations, std::uint32_t retry_budget,
         const std::string& balance, unsigned workers) {
        GenerationInputs in;
        in.corpus = corpus.get();
        in.image_embeddings = image.get();
        in.text_embeddings = text.get();
        in.annotations = annotations.get();
        const Strategy s{strategy_kind(strategy), seed, retry_budget};
        const GenerateOptions opts{parse_balance_mode(balance), workers};
        GenerationResult r;
        {
          py::gil_scoped_release release;
          r = generate(in, s, opts);
        }
        std::vector<py::tuple> failures;
        for (const auto& f : r.failures) failures.push_back(py::make_tuple(f.source_id, f.reason));
        return py::make_tuple(std::move(r.pairs), failures);
      },
      py::arg("corpus"), py::arg("strategy"), py::arg("seed") = 0, py::arg("image") = nullptr,
      py::arg("text") = nullptr, py::arg("annotations") = nullptr, py::arg("retry_budget") = 10,
      py::arg("balance") = "keep-all", py::arg("workers") = 1,
      "Runs one misinformer; returns (pairs, [(source_id, reason), ...]).");

  m.def(
      "combine_hybrid",
      [](const std::vector<GeneratedPair>& ooc, const std::vector<GeneratedPair>& nei, std::uint64_t seed,
         const std::string& balance, const std::string& ooc_source, const std::string& nei_source) {
        return combine_hybrid({ooc_source, nei_source, parse_hybrid_balance(balance), seed}, ooc, nei);
      },
      py::arg("ooc_pairs"), py::arg("nei_pairs"), py::arg("seed") = 0, py::arg("balance") = "downsample",
      py::arg("ooc_source") = "ooc", py::arg("nei_source") = "nei");

  m.def(
      "emit_dataset",
      [](const std::vector<GeneratedPair>& pairs, const std::filesystem::path& out, const std::string& split,
         const std::string& strategy, std::uint64_t seed, const std::string& balance,
         const std::map<std::string, std::string>& config) {
        RunInfo run{strategy, seed, std::nullopt, balance, config};
        const Manifest man = emit_dataset(pairs, parse_split(split), out, run);
        save_manifest(man, manifest_path_for(out));
        return manifest_dict(man);
      },
      py::arg("pairs"), py::arg("out"), py::arg("split") = "train", py::arg("strategy") = "",
      py::arg("seed") = 0, py::arg("balance") = "keep-all",
      py::arg("config") = std::map<std::string, std::string>{},
      "Writes the dataset and its manifest; returns the manifest fields.");
  m.def("load_dataset", &load_dataset);
  m.def("dataset_stats", [](const std::filesystem::path& p) { return counts_dict(dataset_stats(p)); });

  m.def(
      "import_external",
      [](const std::string& format, const std::filesystem::path& path, std::shared_ptr<const Corpus> corpus)
          -> py::object {
        ImportResult r = import_external(parse_external_format(format), path, corpus.get());
        if (auto* items = std::get_if<std::vector<EvalItem>>(&r)) return py::cast(*items);
        return py::cast(std::get<std::vector<GeneratedPair>>(r));
      },
      py::arg("format"), py::arg("path"), py::arg("corpus") = nullptr);

  // --- evaluation -----------------------------------------------------------
  py::class_<EvalItem>(m, "EvalItem")
      .def_readonly("id", &EvalItem::id)
      .def_readonly("image_id", &EvalItem::image_id)
      .def_readonly("caption", &EvalItem::caption)
      .def_property_readonly("label", [](const EvalItem& i) { return std::string(to_string(i.label)); });

  py::class_<Prediction>(m, "Prediction")
      .def(py::init([](std::uint64_t id, const std::string& label) {
             return Prediction{id, parse_predicted_label(label), {}};
           }),
           py::arg("id"), py::arg("label"))
      .def_readonly("id", &Prediction::id)
      .def_property_readonly("label", [](const Prediction& p) { return std::string(to_string(p.label)); });

  py::class_<EvalReport>(m, "EvalReport")
      .def_readonly("n", &EvalReport::n)
      .def_readonly("accuracy", &EvalReport::accuracy)
      .def_readonly("specificity", &EvalReport::specificity)
      .def_readonly("sensitivity", &EvalReport::sensitivity)
      .def_readonly("strategy", &EvalReport::strategy)
      .def_property_readonly("modality", [](const EvalReport& r) { return std::string(to_string(r.modality)); })
      .def_property_readonly("confusion", [](const EvalReport& r) {
        const Confusion& c = r.confusion;
        return py::make_tuple(c.truthful_as_truthful, c.truthful_as_falsified, c.falsified_as_truthful,
                              c.falsified_as_falsified);
      });

  m.def("binarize", [](const std::string& label) { return std::string(to_string(binarize(label))); });
  m.def("load_benchmark", &load_benchmark);
  m.def("load_predictions", &load_predictions);
  m.def(
      "score",
      [](const std::vector<EvalItem>& items, const std::vector<Prediction>& preds, const std::string& strategy,
         const std::string& modality) { return score(items, preds, strategy, parse_eval_modality(modality)); },
      py::arg("benchmark"), py::arg("predictions"), py::arg("strategy") = "", py::arg("modality") = "multimodal");
  m.def(
      "make_report",
      [](std::size_t tt, std::size_t tf, std::size_t ft, std::size_t ff, const std::string& strategy,
         const std::string& modality) {
        return make_report({tt, tf, ft, ff}, strategy, parse_eval_modality(modality));
      },
      py::arg("tt"), py::arg("tf"), py::arg("ft"), py::arg("ff"), py::arg("strategy") = "",
      py::arg("modality") = "multimodal", "Report from confusion counts.");
  m.def(
      "render_report",
      [](const std::vector<EvalReport>& reports, const std::string& layout) {
        return render_report(reports, parse_report_layout(layout));
      },
      py::arg("reports"), py::arg("layout") = "table3");
  m.def("report_to_json", [](const std::vector<EvalReport>& r) { return report_to_json(r); });
}
