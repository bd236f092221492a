#include "edascope/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>

#include <nlohmann/json.hpp>

#include "edascope/error.hpp"
#include "edascope/util.hpp"

namespace edascope {

using nlohmann::json;

std::vector<TokenId> PlantedTopics::top_tokens(std::size_t topic, std::size_t n) const {
    std::vector<TokenId> ids(V);
    std::iota(ids.begin(), ids.end(), TokenId{0});
    std::stable_sort(ids.begin(), ids.end(), [&](TokenId a, TokenId b) { return phi[topic][a] > phi[topic][b]; });
    ids.resize(std::min(n, ids.size()));
    return ids;
}

PlantedTopics plant_topic_corpus(const PlantedTopicSpec& spec) {
    if (spec.topics < 1 || spec.vocabulary < spec.topics || spec.min_length < 1 || spec.max_length < spec.min_length) {
        throw Error(ErrorCode::InvalidHyperparameter, "bad planted corpus spec");
    }
    Rng rng(spec.seed);
    PlantedTopics out;
    out.K = spec.topics;
    out.V = spec.vocabulary;
    out.phi.assign(out.K, std::vector<double>(out.V, 0.0));
    const std::size_t slice = out.V / out.K;
    for (std::size_t k = 0; k < out.K; ++k) {
        const std::size_t lo = k * slice;
        const std::size_t hi = k + 1 == out.K ? out.V : lo + slice;
        // Shuffle ranks inside the slice so topic heads are not just low ids.
        std::vector<std::size_t> order(hi - lo);
        std::iota(order.begin(), order.end(), lo);
        for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[rng.below(i)]);
        double total = 0.0;
        for (std::size_t r = 0; r < order.size(); ++r) {
            out.phi[k][order[r]] = 1.0 / static_cast<double>(r + 1);
            total += out.phi[k][order[r]];
        }
        for (auto& p : out.phi[k]) p /= total;
    }
    std::vector<double> theta(out.K);
    for (std::size_t d = 0; d < spec.documents; ++d) {
        double s = 0.0;
        for (auto& t : theta) s += t = rng.gamma(spec.doc_concentration);
        for (auto& t : theta) t = s > 0.0 ? t / s : 1.0 / static_cast<double>(out.K);
        const std::size_t len = spec.min_length + rng.below(spec.max_length - spec.min_length + 1);
        std::vector<TokenId> doc;
        doc.reserve(len);
        for (std::size_t i = 0; i < len; ++i) {
            double u = rng.uniform();
            std::size_t k = 0;
            while (k + 1 < out.K && u >= theta[k]) u -= theta[k++];
            double v = rng.uniform();
            std::size_t w = 0;
            while (w + 1 < out.V && v >= out.phi[k][w]) v -= out.phi[k][w++];
            doc.push_back(static_cast<TokenId>(w));
        }
        out.docs.push_back(std::move(doc));
    }
    return out;
}

namespace {

struct Template {
    const char* name;
    std::vector<const char*> lines;  // '@' is replaced by the branch number
    const char* column = "";         // evaluation output column
};

const std::vector<Template> kLoad = {
    {"read", {"df@ = pd.read_csv(\"data@.csv\")"}},
    {"read_rename", {"df@ = pd.read_csv(\"data@.csv\", sep=\";\")", "df@ = df@.rename(columns=str.lower)"}},
    {"read_index", {"df@ = pd.read_csv(\"data@.csv\")", "df@ = df@.set_index(\"id\")"}},
};

const std::vector<Template> kPrep = {
    {"dropna", {"df@ = df@.dropna()", "df@ = df@.reset_index(drop=True)"}},
    {"fillna", {"df@ = df@.fillna(df@.mean())"}},
    {"dummies", {"df@ = pd.get_dummies(df@, columns=[\"cat\"])"}},
    {"drop_cast", {"df@ = df@.drop(columns=[\"extra\"])", "df@ = df@.astype(float)"}},
    {"scale", {"scaler@ = StandardScaler()", "df@[feats] = scaler@.fit_transform(df@[feats])"}},
    {"split", {"df@, hold@ = train_test_split(df@, test_size=0.2)"}},
    {"replace", {"df@ = df@.replace({\"?\": np.nan})", "df@ = df@[df@[\"y\"].notnull()]"}},
    {"concat", {"df@ = pd.concat([df@, df@.sample(frac=0.1)])"}},
    {"encode", {"enc@ = LabelEncoder()", "df@[\"cat\"] = enc@.fit_transform(df@[\"cat\"])"}},
    {"nulls", {"df@ = df@[df@.isnull().sum(axis=1) == 0]"}},
};

const std::vector<Template> kModel = {
    {"logreg", {"model@ = LogisticRegression(max_iter=200)", "model@ = model@.fit(df@[feats], df@[\"y\"])"}},
    {"forest", {"model@ = RandomForestClassifier(n_estimators=50)", "model@ = model@.fit(df@[feats], df@[\"y\"])"}},
    {"tree", {"model@ = DecisionTreeClassifier(max_depth=4)", "model@ = model@.fit(df@[feats], df@[\"y\"])"}},
    {"svc", {"model@ = SVC(probability=True)", "model@ = model@.fit(df@[feats], df@[\"y\"])"}},
    {"knn", {"model@ = KNeighborsClassifier(n_neighbors=5)", "model@ = model@.fit(df@[feats], df@[\"y\"])"}},
    {"linreg", {"model@ = LinearRegression()", "model@ = model@.fit(df@[feats], df@[\"y\"])"}},
    {"kmeans", {"model@ = KMeans(n_clusters=3)", "df@[\"cluster\"] = model@.fit_predict(df@[feats])"}},
    {"keras",
     {"model@ = Sequential()", "model@.add(Dense(8, activation=\"relu\"))", "model@.compile(loss=\"mse\")",
      "hist@ = model@.fit(df@[feats], df@[\"y\"], epochs=3)"}},
};

const std::vector<Template> kEval = {
    {"accuracy",
     {"df@[\"pred\"] = model@.predict(df@[feats])", "df@[\"acc\"] = accuracy_score(df@[\"y\"], df@[\"pred\"])"},
     "acc"},
    {"confusion",
     {"df@[\"pred\"] = model@.predict(df@[feats])", "cm@ = confusion_matrix(df@[\"y\"], df@[\"pred\"])",
      "df@[\"tp\"] = np.diag(cm@).sum()"},
     "tp"},
    {"cv", {"df@[\"cv\"] = cross_val_score(model@, df@[feats], df@[\"y\"], cv=5).mean()"}, "cv"},
    {"auc",
     {"df@[\"proba\"] = model@.predict_proba(df@[feats])[:, 1]", "df@[\"auc\"] = roc_auc_score(df@[\"y\"], df@[\"proba\"])"},
     "auc"},
    {"rmse",
     {"df@[\"pred\"] = model@.predict(df@[feats])", "df@[\"rmse\"] = np.sqrt(mean_squared_error(df@[\"y\"], df@[\"pred\"]))"},
     "rmse"},
    {"f1", {"df@[\"pred\"] = model@.predict(df@[feats])", "df@[\"f1\"] = f1_score(df@[\"y\"], df@[\"pred\"])"}, "f1"},
    {"score", {"df@[\"score\"] = model@.score(df@[feats], df@[\"y\"])"}, "score"},
};

const std::vector<Template> kVis = {
    {"hist", {"plt.figure(figsize=(8, 4))", "plt.hist(df@[\"y\"])", "plt.title(\"target\")", "plt.show()"}},
    {"heatmap", {"sns.heatmap(df@.corr(), annot=True)", "plt.show()"}},
    {"count", {"sns.countplot(x=\"cat\", data=df@)", "plt.show()"}},
    {"series", {"df@[\"y\"].plot(kind=\"hist\")", "plt.xlabel(\"y\")", "plt.show()"}},
    {"scatter", {"fig@, ax@ = plt.subplots()", "ax@.scatter(df@[\"a\"], df@[\"b\"])", "plt.show()"}},
    {"box", {"sns.boxplot(x=\"cat\", y=\"a\", data=df@)", "plt.show()"}},
    {"dist", {"sns.distplot(df@[\"a\"])", "plt.ylabel(\"density\")", "plt.show()"}},
    {"trend", {"plt.plot(df@[\"a\"].values)", "plt.title(\"trend\")", "plt.show()"}},
    {"bar", {"sns.barplot(x=\"cat\", y=\"y\", data=df@)", "plt.show()"}},
};

const char* kHeader =
    "%matplotlib inline\n"
    "import pandas as pd\n"
    "import numpy as np\n"
    "import matplotlib.pyplot as plt\n"
    "import seaborn as sns\n"
    "from sklearn.model_selection import train_test_split, cross_val_score\n"
    "from sklearn.preprocessing import StandardScaler, LabelEncoder\n"
    "from sklearn.linear_model import LogisticRegression, LinearRegression\n"
    "from sklearn.ensemble import RandomForestClassifier\n"
    "from sklearn.tree import DecisionTreeClassifier\n"
    "from sklearn.svm import SVC\n"
    "from sklearn.neighbors import KNeighborsClassifier\n"
    "from sklearn.cluster import KMeans\n"
    "from sklearn.metrics import accuracy_score, confusion_matrix, f1_score, roc_auc_score, mean_squared_error\n"
    "from keras.models import Sequential\n"
    "from keras.layers import Dense\n"
    "feats = [\"a\", \"b\"]";

const std::vector<const char*> kNoise = {
    "width = 12\nheight = 4",
    "def describe_col(frame, col):\n    return frame[col].describe()",
    "palette = \"muted\"",
    "SEED = 42",
};

const std::vector<const char*> kMarkdown = {"## Load the data", "Look at the distribution first.",
                                            "### Model", "Results below.", "Some cleaning is needed."};

std::string render(const std::vector<const char*>& lines, std::size_t branch) {
    std::string out;
    for (std::size_t i = 0; i < lines.size(); ++i) {
        if (i) out += '\n';
        for (const char* c = lines[i]; *c; ++c) {
            if (*c == '@') {
                out += std::to_string(branch);
            } else {
                out += *c;
            }
        }
    }
    return out;
}

class BranchBuilder {
public:
    BranchBuilder(Rng& rng, double preferred) : rng_(rng), preferred_(preferred) {}

    // Picks from pool, favoring the previous template's preferred successor.
    const Template& pick(const std::vector<Template>& pool) {
        std::size_t idx = 0;
        if (prev_ && rng_.uniform() < preferred_) {
            idx = fnv1a(prev_->name, fnv1a(pool.front().name)) % pool.size();
        } else {
            idx = rng_.below(pool.size());
        }
        prev_ = &pool[idx];
        return *prev_;
    }

private:
    Rng& rng_;
    double preferred_;
    const Template* prev_ = nullptr;
};

std::vector<std::string> build_branch(Rng& rng, const SyntheticSpec& spec, std::size_t branch) {
    BranchBuilder b(rng, spec.preferred_successor);
    std::vector<std::string> blocks;
    blocks.push_back(render(b.pick(kLoad).lines, branch));
    const std::size_t preps = 1 + rng.below(3);
    for (std::size_t i = 0; i < preps; ++i) blocks.push_back(render(b.pick(kPrep).lines, branch));
    const bool modeled = rng.uniform() < 0.65;
    if (modeled) {
        blocks.push_back(render(b.pick(kModel).lines, branch));
        const std::size_t evals = rng.below(2);
        for (std::size_t i = 0; i < evals; ++i) blocks.push_back(render(b.pick(kEval).lines, branch));
    }
    if (modeled && rng.uniform() < 0.5) {
        const Template& t = b.pick(kEval);
        std::string text = render(t.lines, branch);
        text += "\nprint(df" + std::to_string(branch) + "[\"" + t.column + "\"].mean())";
        blocks.push_back(text);
    } else {
        blocks.push_back(render(b.pick(kVis).lines, branch));
    }
    return blocks;
}

json source_lines(const std::string& text) {
    json lines = json::array();
    std::size_t start = 0;
    while (start < text.size()) {
        const auto nl = text.find('\n', start);
        if (nl == std::string::npos) {
            lines.push_back(text.substr(start));
            break;
        }
        lines.push_back(text.substr(start, nl + 1 - start));
        start = nl + 1;
    }
    return lines;
}

}  // namespace

json SyntheticNotebook::document() const {
    json cells_json = json::array();
    for (std::size_t i = 0; i < cells.size(); ++i) {
        json c = {{"metadata", json::object()}, {"source", source_lines(cells[i])}};
        if (markdown[i]) {
            c["cell_type"] = "markdown";
        } else {
            c["cell_type"] = "code";
            c["execution_count"] = nullptr;
            json outputs = json::array();
            if (stored_output[i]) {
                outputs.push_back({{"output_type", "stream"}, {"name", "stdout"}, {"text", json::array({"0.5\n"})}});
            }
            c["outputs"] = outputs;
        }
        cells_json.push_back(std::move(c));
    }
    return json{{"nbformat", 4},
                {"nbformat_minor", 5},
                {"metadata", {{"language_info", {{"name", "python"}}}}},
                {"cells", cells_json}};
}

std::vector<SyntheticNotebook> generate_notebooks(const SyntheticSpec& spec) {
    if (spec.min_branches < 1 || spec.max_branches < spec.min_branches || spec.max_branches > 9) {
        throw Error(ErrorCode::InvalidHyperparameter, "branch range must be within 1..9");
    }
    if (!(spec.preferred_successor >= 0.0 && spec.preferred_successor <= 1.0)) {
        throw Error(ErrorCode::InvalidHyperparameter, "preferred_successor must be a probability");
    }
    Rng rng(spec.seed);
    std::vector<SyntheticNotebook> out;
    for (std::size_t n = 0; n < spec.notebooks; ++n) {
        SyntheticNotebook nb;
        char name[64];
        std::snprintf(name, sizeof(name), "part%02zu/nb%04zu.ipynb", n / 50, n);
        nb.relative_path = name;

        const std::size_t branches = spec.min_branches + rng.below(spec.max_branches - spec.min_branches + 1);
        std::vector<std::vector<std::string>> pending;
        for (std::size_t b = 0; b < branches; ++b) pending.push_back(build_branch(rng, spec, b));
        nb.branch_cells.resize(branches);
        std::vector<std::size_t> next(branches, 0);

        auto add_cell = [&](std::string text, bool md, bool output) {
            nb.cells.push_back(std::move(text));
            nb.markdown.push_back(md);
            nb.stored_output.push_back(output);
        };
        add_cell(kHeader, false, false);

        std::size_t remaining = 0;
        for (const auto& p : pending) remaining += p.size();
        while (remaining > 0) {
            if (rng.uniform() < spec.markdown_rate) add_cell(kMarkdown[rng.below(kMarkdown.size())], true, false);
            if (rng.uniform() < spec.noise_cell_rate) add_cell(kNoise[rng.below(kNoise.size())], false, false);
            // Branch chosen proportionally to its remaining blocks.
            std::uint64_t r = rng.below(remaining);
            std::size_t b = 0;
            while (r >= pending[b].size() - next[b]) {
                r -= pending[b].size() - next[b];
                ++b;
            }
            const bool last = next[b] + 1 == pending[b].size();
            nb.branch_cells[b].push_back(nb.cells.size());
            add_cell(pending[b][next[b]++], false, last);
            --remaining;
        }
        out.push_back(std::move(nb));
    }
    return out;
}

void write_synthetic_corpus(const std::filesystem::path& root, const SyntheticSpec& spec) {
    for (const auto& nb : generate_notebooks(spec)) {
        const auto path = root / nb.relative_path;
        std::filesystem::create_directories(path.parent_path());
        std::ofstream out(path, std::ios::binary);
        if (!out) throw Error(ErrorCode::IoError, "cannot write " + path.string());
        out << nb.document().dump(1) << '\n';
    }
}

}  // namespace edascope
