#include <peeltrace/record.hpp>

#include <cctype>
#include <limits>
#include <sstream>

#include <json.hpp>

namespace peeltrace {

namespace {

using nlohmann::json;

[[noreturn]] void fail(std::size_t line, const std::string &txid, const std::string &msg)
{
    throw RecordError(line, txid, msg);
}

bool isHex64(std::string_view s)
{
    if (s.size() != 64) {
        return false;
    }
    for (char c : s) {
        if (!std::isxdigit(static_cast<unsigned char>(c))) {
            return false;
        }
    }
    return true;
}

std::uint64_t getUint(const json &obj, const char *key, std::uint64_t maxValue,
                      std::size_t line, const std::string &txid)
{
    auto it = obj.find(key);
    if (it == obj.end() || !it->is_number_unsigned()) {
        fail(line, txid, std::string("missing or non-integer field '") + key + "'");
    }
    auto v = it->get<std::uint64_t>();
    if (v > maxValue) {
        fail(line, txid, std::string("field '") + key + "' out of range");
    }
    return v;
}

bool getBool(const json &obj, const char *key, std::size_t line, const std::string &txid)
{
    auto it = obj.find(key);
    if (it == obj.end() || !it->is_boolean()) {
        fail(line, txid, std::string("missing or non-boolean field '") + key + "'");
    }
    return it->get<bool>();
}

std::string getString(const json &obj, const char *key, std::size_t line, const std::string &txid)
{
    auto it = obj.find(key);
    if (it == obj.end() || !it->is_string()) {
        fail(line, txid, std::string("missing or non-string field '") + key + "'");
    }
    return it->get<std::string>();
}

} // namespace

RecordError::RecordError(std::size_t line, std::string txid, const std::string &what)
    : std::runtime_error("line " + std::to_string(line) +
                         (txid.empty() ? std::string() : " (txid " + txid + ")") + ": " + what),
      line_(line),
      txid_(std::move(txid))
{
}

TxRecord parseRecord(std::string_view line, std::size_t lineNo)
{
    json obj = json::parse(line, nullptr, false);
    if (obj.is_discarded() || !obj.is_object()) {
        fail(lineNo, "", "not a JSON object");
    }

    TxRecord rec;
    rec.txid = getString(obj, "txid", lineNo, "");
    if (!isHex64(rec.txid)) {
        fail(lineNo, rec.txid, "txid is not 64 hex characters");
    }

    auto version = getUint(obj, "version", std::numeric_limits<std::uint64_t>::max(), lineNo, rec.txid);
    if (version != 1 && version != 2) {
        fail(lineNo, rec.txid, "version must be 1 or 2");
    }
    rec.version = static_cast<std::uint8_t>(version);
    rec.locktime = static_cast<std::uint32_t>(
        getUint(obj, "locktime", std::numeric_limits<std::uint32_t>::max(), lineNo, rec.txid));
    rec.segwit = getBool(obj, "segwit", lineNo, rec.txid);
    rec.height = static_cast<std::uint32_t>(
        getUint(obj, "height", std::numeric_limits<std::uint32_t>::max(), lineNo, rec.txid));
    rec.index = static_cast<std::uint32_t>(
        getUint(obj, "index", std::numeric_limits<std::uint32_t>::max(), lineNo, rec.txid));
    rec.coinbase = getBool(obj, "coinbase", lineNo, rec.txid);

    auto inputsIt = obj.find("inputs");
    if (inputsIt == obj.end() || !inputsIt->is_array()) {
        fail(lineNo, rec.txid, "missing or non-array field 'inputs'");
    }
    for (const auto &entry : *inputsIt) {
        if (!entry.is_object()) {
            fail(lineNo, rec.txid, "input is not an object");
        }
        InputRecord in;
        in.prevTxid = getString(entry, "prev_txid", lineNo, rec.txid);
        if (!isHex64(in.prevTxid)) {
            fail(lineNo, rec.txid, "prev_txid is not 64 hex characters");
        }
        in.prevIndex = static_cast<std::uint32_t>(
            getUint(entry, "prev_index", std::numeric_limits<std::uint32_t>::max(), lineNo, rec.txid));
        in.sequence = static_cast<std::uint32_t>(
            getUint(entry, "sequence", std::numeric_limits<std::uint32_t>::max(), lineNo, rec.txid));
        rec.inputs.push_back(std::move(in));
    }

    auto outputsIt = obj.find("outputs");
    if (outputsIt == obj.end() || !outputsIt->is_array()) {
        fail(lineNo, rec.txid, "missing or non-array field 'outputs'");
    }
    for (const auto &entry : *outputsIt) {
        if (!entry.is_object()) {
            fail(lineNo, rec.txid, "output is not an object");
        }
        OutputRecord out;
        out.address = getString(entry, "address", lineNo, rec.txid);
        if (out.address.empty()) {
            fail(lineNo, rec.txid, "output address is empty");
        }
        auto typeName = getString(entry, "type", lineNo, rec.txid);
        auto type = parseAddressType(typeName);
        if (!type) {
            fail(lineNo, rec.txid, "unknown address type '" + typeName + "'");
        }
        out.type = *type;
        auto value = getUint(entry, "value", std::numeric_limits<std::int64_t>::max(), lineNo, rec.txid);
        if (value == 0) {
            fail(lineNo, rec.txid, "output value must be positive");
        }
        out.value = static_cast<std::int64_t>(value);
        rec.outputs.push_back(std::move(out));
    }

    if (rec.outputs.empty()) {
        fail(lineNo, rec.txid, "transaction has no outputs");
    }
    if (rec.coinbase && !rec.inputs.empty()) {
        fail(lineNo, rec.txid, "coinbase transaction must have no inputs");
    }
    if (!rec.coinbase && rec.inputs.empty()) {
        fail(lineNo, rec.txid, "non-coinbase transaction must have inputs");
    }
    return rec;
}

std::string serializeRecord(const TxRecord &record)
{
    std::ostringstream out;
    out << "{\"txid\":\"" << record.txid << "\""
        << ",\"version\":" << static_cast<unsigned>(record.version)
        << ",\"locktime\":" << record.locktime
        << ",\"segwit\":" << (record.segwit ? "true" : "false")
        << ",\"height\":" << record.height
        << ",\"index\":" << record.index
        << ",\"coinbase\":" << (record.coinbase ? "true" : "false")
        << ",\"inputs\":[";
    for (std::size_t i = 0; i < record.inputs.size(); ++i) {
        const auto &in = record.inputs[i];
        if (i > 0) {
            out << ",";
        }
        out << "{\"prev_txid\":\"" << in.prevTxid << "\""
            << ",\"prev_index\":" << in.prevIndex
            << ",\"sequence\":" << in.sequence << "}";
    }
    out << "],\"outputs\":[";
    for (std::size_t i = 0; i < record.outputs.size(); ++i) {
        const auto &o = record.outputs[i];
        if (i > 0) {
            out << ",";
        }
        out << "{\"address\":\"" << o.address << "\""
            << ",\"type\":\"" << addressTypeName(o.type) << "\""
            << ",\"value\":" << o.value << "}";
    }
    out << "]}";
    return out.str();
}

} // namespace peeltrace
