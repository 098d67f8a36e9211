#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace iscreen {

/// Base class for every error thrown by this library.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

class ConstantColumn : public Error {
public:
    int column;
    explicit ConstantColumn(int j)
        : Error("column " + std::to_string(j) + " has zero variance"), column(j) {}
};

class IndexActive : public Error {
public:
    int column;
    explicit IndexActive(int j)
        : Error("column " + std::to_string(j) + " is already in the active set"), column(j) {}
};

class NearCollinear : public Error {
public:
    int column;
    explicit NearCollinear(int j)
        : Error("column " + std::to_string(j) +
                " is numerically collinear with the active set"),
          column(j) {}
};

class RankDeficient : public Error {
public:
    std::vector<int> columns;
    explicit RankDeficient(std::vector<int> cols)
        : Error(describe(cols)), columns(std::move(cols)) {}

private:
    static std::string describe(const std::vector<int>& cols) {
        std::string msg = "rank-deficient extension; offending columns:";
        for (int c : cols) msg += " " + std::to_string(c);
        return msg;
    }
};

class NotSubset : public Error {
public:
    NotSubset() : Error("keep set is not a subset of the active set") {}
};

class NoEligibleColumns : public Error {
public:
    NoEligibleColumns() : Error("no eligible columns remain for screening") {}
};

class InvalidRates : public Error {
public:
    explicit InvalidRates(const std::string& why) : Error("invalid rate constants: " + why) {}
};

class InvalidConfig : public Error {
public:
    explicit InvalidConfig(const std::string& why) : Error("invalid configuration: " + why) {}
};

class NotPositiveDefinite : public Error {
public:
    NotPositiveDefinite() : Error("covariance matrix is not positive definite") {}
};

class InfeasibleConstruction : public Error {
public:
    explicit InfeasibleConstruction(const std::string& why)
        : Error("adversarial construction infeasible: " + why) {}
};

class InvalidDataset : public Error {
public:
    explicit InvalidDataset(const std::string& why) : Error("invalid dataset: " + why) {}
};

// CSV ingestion errors. Lines and columns are 1-based to match editor conventions.
class ParseError : public Error {
public:
    long line, column;
    ParseError(long line_, long col_, const std::string& why)
        : Error("parse error at line " + std::to_string(line_) + ", column " +
                std::to_string(col_) + ": " + why),
          line(line_), column(col_) {}
};

class NonNumericCell : public Error {
public:
    long line, column;
    std::string cell;
    NonNumericCell(long line_, long col_, std::string cell_)
        : Error("non-numeric or non-finite cell at line " + std::to_string(line_) +
                ", column " + std::to_string(col_) + ": '" + cell_ + "'"),
          line(line_), column(col_), cell(std::move(cell_)) {}
};

class EmptyFile : public Error {
public:
    EmptyFile() : Error("input file is empty") {}
};

class ResponseColumnMissing : public Error {
public:
    explicit ResponseColumnMissing(const std::string& name)
        : Error("response column '" + name + "' not found") {}
};

} // namespace iscreen
