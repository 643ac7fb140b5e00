#pragma once

#include <string_view>

// Default word lists and lexicons compiled into the library from core/data.
namespace fednlp::resources {

std::string_view stopwords_en();
std::string_view abbreviations_en();
std::string_view lexicon_generic_csv();
std::string_view lexicon_financial_csv();

}  // namespace fednlp::resources
