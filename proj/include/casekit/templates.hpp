#pragma once

#include <string_view>

namespace casekit::templates {

// Instruction scaffolding, embedded so the binaries are self-contained.
// The files under templates/ carry the same bytes; a test pins the two
// copies against each other.

inline constexpr std::string_view kPreprocess =
    "I have a legal case description and require two distinct pieces of information:\n"
    "1. Summary: Please provide a detailed summary of the case, focusing on the facts and events. Exclude any information about the verdict.\n"
    "2. Verdict: State the verdict of the case, consider the following categories:\n"
    "- Plaintiff win\n"
    "- Defendant win\n"
    "- Settlement\n"
    "- Case dismissal\n"
    "- Unsure\n"
    "If the verdict is mentioned, respond exclusively with the chosen categories ONLY. If the outcome is not explicitly mentioned or cannot be inferred from the information given, please respond with `unsure' only.\n"
    "Format your responses as follows:\n"
    "# - For the summary, begin with `Answer 1:'\n"
    "# - For the verdict, start with `Answer 2:'\n"
    "Here is the description of the case:\n"
    "{{CASE_DESCRIPTION}}";

inline constexpr std::string_view kScr =
    "### Instruction:\n"
    "You are a legal expert who specializes in comparing user-supplied legal cases to a list of candidate legal cases, which includes titles and content. Your main function is to identify and output the title of the most similar case from the list based on the description provided.\n"
    "You should only output the case title and not any other information.\n"
    "Consider the following choices:\n"
    "{{CHOICES}}\n"
    "### Input:\n"
    "{{INPUT}}";

inline constexpr std::string_view kPcr =
    "### Instruction:\n"
    "You are a legal expert who specializes in comparing user-supplied legal cases to a list of candidate legal cases, which includes titles and content. Your main function is to identify and output the precedent case from the list based on the description provided.\n"
    "You should only output the reasoning process and case title.\n"
    "Consider the following choices:\n"
    "{{CHOICES}}\n"
    "### Input:\n"
    "{{INPUT}}";

inline constexpr std::string_view kLjp =
    "### Instruction:\n"
    "You are a legal expert who specializes in predicting outcomes for legal cases. Utilize your internal knowledge base to predict verdict. Your main function is to anticipate the likely verdict of the legal case presented by the user.\n"
    "You should only output the verdict and not any other information.\n"
    "Consider the following choices:\n"
    "1. Defendant Wins\n"
    "2. Plaintiff Wins\n"
    "3. Settlement\n"
    "4. Case Dismissal\n"
    "\n"
    "### Input:\n"
    "{{INPUT}}";

inline constexpr std::string_view kSimilarExampleHeader = "### Similar Case Example:";
inline constexpr std::string_view kPrecedentExampleHeader = "### Precedent Case Example:";

}  // namespace casekit::templates
