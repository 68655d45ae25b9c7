#include "hgmem/prompts.hpp"

#include "hgmem/providers.hpp"

namespace hgmem::prompts {

std::string relation(std::string_view memory_1, std::string_view memory_2) {
  std::string p = "Determine the relationship between the following two memories.\n\n";
  p += "Memory 1: ";
  p += memory_1;
  p += "\nMemory 2: ";
  p += memory_2;
  p += "\n\nPossible relations:\n"
       "- \"support\": one memory supports the other (asymmetric)\n"
       "- \"contradict\": one memory contradicts the other (asymmetric)\n"
       "- \"coreference\": same entity or event (symmetric)\n"
       "- \"causal\": one memory leads to the other (asymmetric)\n"
       "- \"semantic\": similar meaning (symmetric)\n"
       "- \"unrelated\": no meaningful relation\n\n"
       "Return JSON strictly in the format: {\"relation\": \"...\", \"confidence\": 0-1}";
  return p;
}

std::string summary(std::string_view content) {
  std::string p =
      "Generate a structured analysis of the following content by:\n"
      "1. Identifying the most salient keywords and core themes (focus on nouns, verbs, and key concepts).\n"
      "2. Writing a concise summary (one to two sentences). Don't be redundant, summarize everything in the "
      "fewest words possible.\n\n"
      "Format the response as a JSON object:\n"
      "{\n"
      "  \"keywords\": [\n"
      "    // several specific, distinct keywords...\n"
      "    // Order from most to least important...\n"
      "  ],\n"
      "  \"summary\":\n"
      "    // a concise one to two sentence summary...\n"
      "}\n\n"
      "Content for analysis:\n";
  p += content;
  return p;
}

std::string boundary(std::span<const EventNode> buffer) {
  std::string p =
      "Please analyze the following conversation and identify where topic changes occur.\n"
      "A topic change happens when the conversation shifts to a completely different subject or theme.\n\n"
      "Conversation:\n";
  p += linearize_buffer(buffer);
  p += "\n\nIdentify the indices (positions) where topic boundaries occur. A boundary at index i means that "
       "the topic changes between utterance i and utterance i+1.\n"
       "Return only the boundary indices as a JSON array.\n\n"
       "Return your response as a JSON object with exactly this structure:\n"
       "{ \"boundaries\": [array_of_indices] }\n\n"
       "Example: { \"boundaries\": [2, 6] }";
  return p;
}

std::string entailment(std::string_view summary, std::string_view utterance) {
  std::string p = "Does the summary below entail the content of the utterance?\n\nSummary: ";
  p += summary;
  p += "\nUtterance: ";
  p += utterance;
  p += "\n\nReturn JSON strictly in the format: {\"entailed\": true|false}";
  return p;
}

std::string temporal(std::string_view query) {
  std::string p = "Does answering the following question depend on dates, times or the order of events?\n\nQuestion: ";
  p += query;
  p += "\n\nReturn JSON strictly in the format: {\"time_sensitive\": true|false}";
  return p;
}

std::string answer(std::string_view question, std::span<const std::string> context) {
  std::string p = "Answer the question using only the conversation excerpts below. Reply with a short phrase.\n\n";
  for (const auto& c : context) {
    p += "- ";
    p += c;
    p += '\n';
  }
  p += "\nQuestion: ";
  p += question;
  return p;
}

std::string repair(std::string_view original, std::string_view bad_reply, std::string_view expected) {
  std::string p(original);
  p += "\n\nYour previous reply could not be parsed:\n";
  p += bad_reply;
  p += "\n\nReply again with only a JSON object of the form ";
  p += expected;
  p += '.';
  return p;
}

}  // namespace hgmem::prompts
