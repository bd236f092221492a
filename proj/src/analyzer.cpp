#include "edascope/analyzer.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <set>

#include "cell_analysis.hpp"
#include "edascope/error.hpp"
#include "edascope/python_parser.hpp"

namespace edascope {

using python::Expr;
using python::ExprKind;
using python::Stmt;
using python::StmtKind;

std::vector<std::string> ExtractOptions::default_allowlist() {
    return {"pandas", "numpy", "scipy", "sklearn", "matplotlib", "seaborn", "keras", "__builtins__", "*"};
}

namespace {

std::string root_of(std::string_view canonical) {
    return std::string(canonical.substr(0, canonical.find('.')));
}

std::optional<std::string> resolve_callee(const Expr& callee, const ImportEnv& env, ReceiverPolicy policy) {
    if (callee.kind == ExprKind::Name) {
        if (auto it = env.aliases.find(callee.id); it != env.aliases.end()) return it->second;
        if (python::is_builtin(callee.id)) return "__builtins__." + callee.id;
        return std::nullopt;
    }
    if (callee.kind != ExprKind::Attribute) return std::nullopt;
    std::string chain;
    const Expr* cur = &callee;
    while (cur->kind == ExprKind::Attribute) {
        chain.insert(0, "." + cur->id);
        cur = cur->operands.front().get();
    }
    if (cur->kind == ExprKind::Name) {
        if (auto it = env.aliases.find(cur->id); it != env.aliases.end()) return it->second + chain;
        if (python::is_builtin(cur->id)) return "__builtins__." + cur->id + chain;
        if (policy == ReceiverPolicy::OneStep) {
            if (auto it = env.receivers.find(cur->id); it != env.receivers.end()) {
                return it->second + ".*." + callee.id;
            }
        }
    }
    return "*." + callee.id;
}

bool allowed(const std::string& token, const ExtractOptions& options) {
    if (token.find('.') == std::string::npos) return false;
    if (options.allowlist.empty()) return true;
    const auto root = root_of(token);
    return std::find(options.allowlist.begin(), options.allowlist.end(), root) != options.allowlist.end();
}

void collect_imports(const std::vector<Stmt>& body, ImportEnv& env, const ExtractOptions& options);

// Library root a plain assignment gives its Name targets, or nullopt.
std::optional<std::string> assigned_root(const Stmt& s, const ImportEnv& env, const ExtractOptions& options) {
    if (!s.value || s.value->kind != ExprKind::Call) return std::nullopt;
    auto tok = resolve_callee(*s.value->operands.front(), env, ReceiverPolicy::Untracked);
    if (!tok || !allowed(*tok, options)) return std::nullopt;
    auto r = root_of(*tok);
    if (r == "*" || r == "__builtins__") return std::nullopt;
    return r;
}

void apply_assignment(const Stmt& s, ImportEnv& env, const ExtractOptions& options) {
    if (s.kind != StmtKind::Assign) return;
    const auto root = assigned_root(s, env, options);
    for (const auto& t : s.targets) {
        if (t->kind != ExprKind::Name) continue;
        if (root) {
            env.receivers[t->id] = *root;
        } else {
            env.receivers.erase(t->id);
        }
    }
}

void collect_stmt(const Stmt& s, ImportEnv& env, const ExtractOptions& options) {
    switch (s.kind) {
        case StmtKind::Import:
            for (const auto& n : s.names) {
                if (!n.asname.empty()) {
                    env.aliases[n.asname] = n.name;
                } else {
                    const auto head = n.name.substr(0, n.name.find('.'));
                    env.aliases[head] = head;
                }
            }
            return;
        case StmtKind::ImportFrom:
            if (s.level > 0) return;
            for (const auto& n : s.names) {
                if (n.name == "*") continue;
                env.aliases[n.asname.empty() ? n.name : n.asname] = s.name + "." + n.name;
            }
            return;
        default:
            break;
    }
    collect_imports(s.body, env, options);
    collect_imports(s.orelse, env, options);
    collect_imports(s.finalbody, env, options);
    for (const auto& h : s.handlers) collect_imports(h.body, env, options);
}

void collect_imports(const std::vector<Stmt>& body, ImportEnv& env, const ExtractOptions& options) {
    for (const auto& s : body) {
        if (s.kind == StmtKind::FunctionDef || s.kind == StmtKind::ClassDef) continue;
        collect_stmt(s, env, options);
    }
}

}  // namespace

ImportEnv build_import_env(const std::vector<std::string>& block_sources, const ExtractOptions& options) {
    ImportEnv env;
    for (const auto& src : block_sources) {
        const auto syntax = detail::analyze_cell(src);
        collect_imports(syntax.module.body, env, options);
    }
    return env;
}

void update_receivers(ImportEnv& env, std::string_view block, const ExtractOptions& options) {
    const auto syntax = detail::analyze_cell(block);
    for (const auto& s : syntax.module.body) apply_assignment(s, env, options);
}

ApiCalls extract_api_calls(std::string_view block, const ImportEnv& env, const ExtractOptions& options) {
    ApiCalls out;
    const auto syntax = detail::analyze_cell(block);
    if (syntax.def_use.parse_failed) {
        out.parse_failed = true;
        return out;
    }
    std::vector<std::pair<std::size_t, const Expr*>> calls;
    python::for_each_expr(syntax.module, [&](const Expr& e) {
        if (e.kind == ExprKind::Call) calls.emplace_back(e.offset, e.operands.front().get());
    });
    std::stable_sort(calls.begin(), calls.end(), [](const auto& a, const auto& b) { return a.first < b.first; });

    // Receivers evolve statement by statement: a call sees the assignments
    // of earlier top-level statements only.
    ImportEnv local = env;
    const auto& body = syntax.module.body;
    std::size_t applied = 0;
    std::size_t line = 1;
    std::size_t scanned = 0;
    for (const auto& [offset, callee] : calls) {
        if (options.receivers == ReceiverPolicy::OneStep) {
            for (; scanned < offset && scanned < block.size(); ++scanned) line += block[scanned] == '\n';
            while (applied + 1 < body.size() && body[applied + 1].line <= line) apply_assignment(body[applied++], local, options);
        }
        auto tok = resolve_callee(*callee, local, options.receivers);
        if (tok && allowed(*tok, options)) out.tokens.push_back(std::move(*tok));
    }
    return out;
}

Vocabulary::Vocabulary(const std::vector<std::string>& tokens) {
    const std::set<std::string> uniq(tokens.begin(), tokens.end());
    tokens_.assign(uniq.begin(), uniq.end());
    for (std::size_t i = 0; i < tokens_.size(); ++i) ids_.emplace(tokens_[i], static_cast<TokenId>(i));
}

std::optional<TokenId> Vocabulary::id(std::string_view canonical) const {
    const auto it = ids_.find(std::string(canonical));
    if (it == ids_.end()) return std::nullopt;
    return it->second;
}

std::vector<TokenId> Vocabulary::encode(const std::vector<std::string>& tokens) const {
    std::vector<TokenId> out;
    for (const auto& t : tokens) {
        if (auto i = id(t)) out.push_back(*i);
    }
    return out;
}

void Vocabulary::save(const std::filesystem::path& path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorCode::IoError, "cannot write " + path.string());
    for (const auto& t : tokens_) out << t << '\n';
}

Vocabulary Vocabulary::load(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::IoError, "cannot read " + path.string());
    std::vector<std::string> tokens;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty()) tokens.push_back(line);
    }
    Vocabulary v(tokens);
    if (v.size() != tokens.size() || !std::is_sorted(tokens.begin(), tokens.end())) {
        throw Error(ErrorCode::FormatError, "vocabulary file must hold sorted distinct tokens");
    }
    return v;
}

void DocumentFrequency::add_document(const std::vector<std::string>& tokens) {
    ++documents;
    for (const auto& t : std::set<std::string>(tokens.begin(), tokens.end())) ++df[t];
}

std::vector<std::pair<std::string, double>> tfidf_keywords(const std::vector<std::string>& sequence_tokens,
                                                           const DocumentFrequency& corpus_df, std::size_t m) {
    std::map<std::string, std::size_t> tf;
    for (const auto& t : sequence_tokens) ++tf[t];
    struct Scored {
        std::string token;
        std::size_t tf;
        double score;
    };
    std::vector<Scored> scored;
    const double n = static_cast<double>(corpus_df.documents);
    for (const auto& [token, count] : tf) {
        const auto it = corpus_df.df.find(token);
        const double df = it == corpus_df.df.end() ? 0.0 : static_cast<double>(it->second);
        scored.push_back({token, count, static_cast<double>(count) * std::log((1.0 + n) / (1.0 + df))});
    }
    // Equal scores fall back to raw frequency, then to the token text.
    std::sort(scored.begin(), scored.end(), [](const Scored& a, const Scored& b) {
        if (a.score != b.score) return a.score > b.score;
        if (a.tf != b.tf) return a.tf > b.tf;
        return a.token < b.token;
    });
    if (scored.size() > m) scored.resize(m);
    std::vector<std::pair<std::string, double>> out;
    for (auto& s : scored) out.emplace_back(std::move(s.token), s.score);
    return out;
}

EdaType classify_block(const std::vector<TokenId>& block_tokens, const TopicModel& model) {
    if (model.K == 0) return EdaType::Unknown;
    // Summed over sorted distinct tokens so the result cannot depend on order.
    std::map<TokenId, double> counts;
    for (auto w : block_tokens) {
        if (w < model.V) counts[w] += 1.0;
    }
    if (counts.empty()) return EdaType::Unknown;
    std::vector<double> score(model.K, 0.0);
    for (const auto& [w, c] : counts) {
        for (std::size_t k = 0; k < model.K; ++k) score[k] += c * std::log(model.p(k, w));
    }
    const auto best = static_cast<std::size_t>(std::max_element(score.begin(), score.end()) - score.begin());
    return best < model.topic_types.size() ? model.topic_types[best] : EdaType::Unknown;
}

const std::vector<std::vector<std::string>>& default_type_seeds() {
    static const std::vector<std::vector<std::string>> seeds = {
        {"pandas.read_csv", "*.dropna", "*.fillna", "*.drop", "*.merge", "*.astype", "*.replace", "*.isnull",
         "pandas.get_dummies", "pandas.concat", "sklearn.model_selection.train_test_split",
         "sklearn.preprocessing.StandardScaler", "sklearn.preprocessing.LabelEncoder", "*.fit_transform"},
        {"*.fit", "sklearn.linear_model.LogisticRegression", "sklearn.linear_model.LinearRegression",
         "sklearn.ensemble.RandomForestClassifier", "sklearn.ensemble.RandomForestRegressor",
         "sklearn.tree.DecisionTreeClassifier", "sklearn.svm.SVC", "sklearn.cluster.KMeans",
         "sklearn.neighbors.KNeighborsClassifier", "keras.models.Sequential", "*.compile", "*.add"},
        {"*.predict", "*.score", "*.predict_proba", "sklearn.metrics.accuracy_score",
         "sklearn.metrics.confusion_matrix", "sklearn.metrics.classification_report",
         "sklearn.metrics.mean_squared_error", "sklearn.metrics.f1_score", "sklearn.metrics.roc_auc_score",
         "sklearn.model_selection.cross_val_score"},
        {"matplotlib.pyplot.show", "matplotlib.pyplot.figure", "matplotlib.pyplot.plot", "matplotlib.pyplot.title",
         "matplotlib.pyplot.xlabel", "matplotlib.pyplot.ylabel", "matplotlib.pyplot.subplots", "seaborn.heatmap",
         "seaborn.countplot", "seaborn.distplot", "seaborn.barplot", "seaborn.boxplot", "*.plot", "*.hist"},
    };
    return seeds;
}

std::vector<TokenId> SequenceAnalysis::api_order() const {
    std::vector<TokenId> out;
    for (const auto& b : block_tokens) out.insert(out.end(), b.begin(), b.end());
    return out;
}

}  // namespace edascope
